// validity_set.hpp -- assembling the estimated validity pair set from the
// falsification statistics.
//
// A pair (z_k, z_k') enters the estimated set when its sup statistic
// comparand is at most tau_n; for multivalued treatments (J > 2) the pair
// must additionally pass the partition-based psi conditions (the estimated
// set is the intersection of the two screens).  Degenerate pairs -- an
// instrument value with no observations -- are excluded outright and
// flagged, since an unobserved value carries no falsification information.

#ifndef VSIV_VALIDITY_SET_HPP
#define VSIV_VALIDITY_SET_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"
#include "vsiv/partition_stats.hpp"
#include "vsiv/sup_stats.hpp"

namespace vsiv {

struct Z0Config {
    SupConfig sup;                   // mode, variant, endpoint policy, xi0
    PartitionCollection partitions;  // empty -> quantile default at use time
    double psi_threshold = 0.0;      // <= 0 -> reuse tau_n
    std::size_t tuple_cap = 100000;
};

struct PerPairRecord {
    PairId pair;
    double statistic = 0.0;      // sup comparand
    bool included = false;
    bool degenerate = false;
    double psi_comparand = 0.0;  // sqrt(T_n) * worst psi (multivalued only)
    bool psi_pass = true;
};

struct ValiditySetEstimate {
    PairSet selected;
    std::vector<PerPairRecord> per_pair;  // in canonical universe order
    double tau_n = 0.0;
    double xi0 = 0.0;
    TreatmentMode mode = TreatmentMode::binary;
    bool km_used = false;  // psi conditions intersected (multivalued)
};

inline ValiditySetEstimate estimate_z0(const Dataset& ds, const GroupTables& t,
                                       double tau_n, const Z0Config& cfg) {
    if (tau_n <= 0.0) throw std::invalid_argument("tau_n must be positive");
    PairOrientation orient = cfg.sup.mode == TreatmentMode::unordered
                                 ? PairOrientation::upper_triangle
                                 : PairOrientation::both_directions;
    ValiditySetEstimate est;
    est.selected = PairSet(orient);
    est.tau_n = tau_n;
    est.xi0 = cfg.sup.xi0;
    est.mode = cfg.sup.mode;
    est.km_used = t.J() > 2;

    std::vector<double> endpoints = select_endpoints(ds, cfg.sup.endpoints);
    std::vector<SupStatistic> stats = sup_stats_universe(t, endpoints, cfg.sup, orient);

    const PartitionCollection pc = cfg.partitions.parts.empty() && est.km_used
                                       ? PartitionCollection::quantile_default(ds)
                                       : cfg.partitions;
    const double t_thr = cfg.psi_threshold > 0.0 ? cfg.psi_threshold : tau_n;

    for (const auto& s : stats) {
        PerPairRecord rec;
        rec.pair = s.pair;
        rec.statistic = s.value;
        rec.degenerate = s.degenerate;
        rec.included = !s.degenerate && s.value <= tau_n;
        if (est.km_used && rec.included) {
            PsiReport rep = psi_bounds(t, s.pair, pc, cfg.tuple_cap);
            rec.psi_comparand = rep.comparand;
            double root = std::sqrt(rep.t_n);
            rec.psi_pass = root * rep.psi1 <= t_thr && root * rep.psi2 <= t_thr &&
                           root * rep.psi3 <= t_thr;
            rec.included = rec.included && rec.psi_pass;
        }
        if (rec.included) est.selected.add(rec.pair);
        est.per_pair.push_back(rec);
    }
    return est;
}

inline ValiditySetEstimate estimate_z0(const Dataset& ds, double tau_n,
                                       const Z0Config& cfg) {
    GroupTables t(ds);
    return estimate_z0(ds, t, tau_n, cfg);
}

// Zhat0' = Zhat0 intersected with a presumed pair set.
inline PairSet intersect_presumed(const ValiditySetEstimate& est, const PairSet& presumed) {
    return est.selected.intersect(presumed);
}

// Subinstrument enumeration: the instrument is a vector of L component
// columns; every non-empty component subset defines a coarser instrument
// whose values are the observed label combinations.  Each subinstrument is
// screened independently.
struct SubinstrumentResult {
    std::uint32_t mask = 0;                 // bit l set = component l included
    std::vector<std::string> value_labels;  // subinstrument support
    ValiditySetEstimate estimate;
};

inline std::vector<SubinstrumentResult> enumerate_subinstruments(
    const Dataset& base, const std::vector<std::vector<std::string>>& components,
    double tau_n, const Z0Config& cfg, int max_components = 8) {
    const int L = static_cast<int>(components.size());
    if (L < 1) throw std::invalid_argument("need at least one instrument component");
    if (L > max_components)
        throw std::invalid_argument("too many instrument components (2^L blow-up guard)");
    for (const auto& col : components)
        if (static_cast<int>(col.size()) != base.n())
            throw std::invalid_argument("component column length differs from n");

    std::vector<SubinstrumentResult> out;
    for (std::uint32_t mask = 1; mask < (1u << L); ++mask) {
        // Combined labels for the selected components, '|'-joined.
        std::vector<std::string> combined(base.n());
        for (int i = 0; i < base.n(); ++i) {
            std::string lab;
            for (int l = 0; l < L; ++l) {
                if (!((mask >> l) & 1u)) continue;
                if (!lab.empty()) lab += '|';
                lab += components[l][i];
            }
            combined[i] = lab;
        }
        std::vector<std::string> support = combined;
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        if (support.size() < 2) continue;  // no pairs to screen

        Dataset sub;
        sub.treatment_support = base.treatment_support;
        sub.ordered_treatment = base.ordered_treatment;
        sub.instrument_labels = support;
        sub.rows.reserve(base.rows.size());
        for (int i = 0; i < base.n(); ++i) {
            int z = static_cast<int>(
                std::lower_bound(support.begin(), support.end(), combined[i]) -
                support.begin());
            sub.rows.push_back({base.rows[i].y, base.rows[i].d, z});
        }
        SubinstrumentResult res;
        res.mask = mask;
        res.value_labels = support;
        res.estimate = estimate_z0(sub, tau_n, cfg);
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace vsiv

#endif  // VSIV_VALIDITY_SET_HPP
