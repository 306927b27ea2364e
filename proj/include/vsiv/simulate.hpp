// simulate.hpp -- data-generating processes, latent-truth oracles, and the
// Monte Carlo machinery behind the selection-probability tables.
//
// Three DGP families, all with binary treatment and mutually independent
// uniform primitives (U, V, W) plus normal primitives (N, E) per draw:
//   - section5: three instrument values with P(Z) = (0.35, 0.35, 0.30)
//     (Z = 2 when U <= 0.3, 1 when 0.3 < U <= 0.65, else 0), D_z = 1{V<=0.5}
//     for every z, outcomes Y = N except in cell (D, Z) = (1, 0) where the
//     error is replaced by one of four alternatives indexed by the variant:
//     (1) N(-0.7, 1), (2) N(0, 1.675^2), (3) N(0, 0.515^2), (4) a five-part
//     normal mixture with means -1..1 and sd 0.125 selected by W via
//     thresholds 0.15/0.35/0.65/0.85.  Valid displayed pair: (1, 2).
//   - qob: four instrument values with cut points 0.2418/0.4774/0.7440,
//     D_z = 1{V <= t_z}, t = (0.5104, 0.5187, 0.5203, 0.5295); the modified
//     cell is (1, z-index 1) with alternatives (1) N(-0.07, 1),
//     (2) N(0, 1.0675^2), (3) N(0, 0.9325^2), (4) mixture means -0.1..0.1
//     with sd 0.925.  Valid displayed pairs: (0, 2), (0, 3), (2, 3).
//   - custom: a parameterized fully-valid design (instrument probabilities,
//     per-value treatment thresholds on a shared V, constant additive
//     treatment effect), used for size/power and covariance checks.
//
// Primitives are drawn in a fixed per-observation order from per-replication
// streams derived from (master_seed, rep), independent of the DGP variant:
// with common random numbers the valid-pair columns coincide across variants
// by construction, as they do in the reference tables.

#ifndef VSIV_SIMULATE_HPP
#define VSIV_SIMULATE_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"
#include "vsiv/rng.hpp"
#include "vsiv/sup_stats.hpp"
#include "vsiv/validity_set.hpp"

namespace vsiv {

struct DgpSpec {
    enum class Family { section5, qob, custom };
    Family family = Family::section5;
    int variant = 1;  // 1..4 for section5/qob alternative-error designs

    // custom-family parameters (fully valid, binary treatment):
    std::vector<double> z_probs = {0.5, 0.5};
    std::vector<double> d_thresholds = {0.3, 0.7};  // P(D_z = 1), shared V
    double effect = 1.0;                            // Y_1 - Y_0

    // Calibration overrides for the tuning designs: when nonempty these
    // replace the built-in instrument/treatment margins of section5/qob.
    std::vector<double> cal_z_probs;
    std::vector<double> cal_d_thresholds;

    int K() const {
        if (family == Family::section5) return cal_z_probs.empty() ? 3 : static_cast<int>(cal_z_probs.size());
        if (family == Family::qob) return cal_z_probs.empty() ? 4 : static_cast<int>(cal_z_probs.size());
        return static_cast<int>(z_probs.size());
    }

    std::string name() const {
        switch (family) {
            case Family::section5: return "section5:" + std::to_string(variant);
            case Family::qob: return "qob:" + std::to_string(variant);
            default: return "custom";
        }
    }

    void validate() const {
        if (family != Family::custom && (variant < 1 || variant > 4))
            throw std::invalid_argument("DGP variant must be 1..4");
        if (family == Family::custom) {
            if (z_probs.size() < 2 || z_probs.size() != d_thresholds.size())
                throw std::invalid_argument("custom DGP needs matching z_probs/d_thresholds");
            double s = 0.0;
            for (double p : z_probs) {
                if (p < 0.0 || p > 1.0) throw std::invalid_argument("z probability outside [0,1]");
                s += p;
            }
            if (std::fabs(s - 1.0) > 1e-9)
                throw std::invalid_argument("custom z probabilities must sum to 1");
            for (double t : d_thresholds)
                if (t < 0.0 || t > 1.0)
                    throw std::invalid_argument("treatment threshold outside [0,1]");
        }
        if (!cal_z_probs.empty() && cal_z_probs.size() != cal_d_thresholds.size())
            throw std::invalid_argument("calibration overrides must have matching sizes");
    }

    // Index of the instrument value whose treated-arm error is modified, or
    // -1 when every pair is valid.
    int modified_z() const {
        if (family == Family::section5) return 0;
        if (family == Family::qob) return 1;
        return -1;
    }

    // The upper-triangle pairs valid by construction (the family oracle).
    PairSet valid_pairs() const {
        PairSet s(PairOrientation::upper_triangle);
        int bad = modified_z();
        for (int k = 0; k < K(); ++k)
            for (int kp = k + 1; kp < K(); ++kp)
                if (k != bad && kp != bad) s.add({k, kp});
        return s;
    }

    std::vector<double> instrument_probs() const {
        if (!cal_z_probs.empty()) return cal_z_probs;
        if (family == Family::section5) return {0.35, 0.35, 0.30};
        if (family == Family::qob) return {0.2418, 0.2356, 0.2666, 0.2560};
        return z_probs;
    }

    std::vector<double> treatment_thresholds() const {
        if (!cal_d_thresholds.empty()) return cal_d_thresholds;
        if (family == Family::section5) return {0.5, 0.5, 0.5};
        if (family == Family::qob) return {0.5104, 0.5187, 0.5203, 0.5295};
        return d_thresholds;
    }
};

struct LatentDraw {
    double y = 0.0;
    int d = 0, z = 0;
    std::vector<int> dz;                  // potential treatments D_z
    std::vector<std::vector<double>> ydz; // potential outcomes Y_{d,z}, [d][z]
};

namespace detail {

// Error draw for the modified (1, z*) cell, from the shared primitives.
inline double modified_error(const DgpSpec& spec, double w, double eps) {
    const bool s5 = spec.family == DgpSpec::Family::section5;
    switch (spec.variant) {
        case 1: return (s5 ? -0.7 : -0.07) + eps;
        case 2: return (s5 ? 1.675 : 1.0675) * eps;
        case 3: return (s5 ? 0.515 : 0.9325) * eps;
        default: {
            static const double cuts[4] = {0.15, 0.35, 0.65, 0.85};
            int comp = 0;
            while (comp < 4 && w > cuts[comp]) ++comp;
            double mean = s5 ? -1.0 + 0.5 * comp : -0.1 + 0.05 * comp;
            double sd = s5 ? 0.125 : 0.925;
            return mean + sd * eps;
        }
    }
}

}  // namespace detail

// One dataset of size n from the spec, consuming a fixed number of variates
// per observation (U, V, W and two standard normals) so that different
// variants share primitives under a common stream.
inline std::pair<Dataset, std::vector<LatentDraw>> draw(const DgpSpec& spec, int n,
                                                        Rng& rng) {
    spec.validate();
    const int K = spec.K();
    const std::vector<double> zp = spec.instrument_probs();
    const std::vector<double> dt = spec.treatment_thresholds();
    const int zmod = spec.modified_z();

    Dataset ds;
    ds.treatment_support = {0.0, 1.0};
    for (int k = 0; k < K; ++k) ds.instrument_labels.push_back(std::to_string(k));
    ds.rows.reserve(n);
    std::vector<LatentDraw> latents;
    latents.reserve(n);

    // Cumulative instrument probabilities; section5 reverses the listed
    // order (high values for small U), which the latent draw reproduces.
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        double v = rng.uniform();
        double w = rng.uniform();
        double nz = rng.normal();
        double eps = rng.normal();

        int z;
        if (spec.family == DgpSpec::Family::section5 && spec.cal_z_probs.empty()) {
            z = u <= 0.3 ? 2 : (u <= 0.65 ? 1 : 0);
        } else if (spec.family == DgpSpec::Family::qob && spec.cal_z_probs.empty()) {
            z = u <= 0.2418 ? 0 : (u <= 0.4774 ? 1 : (u <= 0.7440 ? 2 : 3));
        } else {
            z = K - 1;
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
                acc += zp[k];
                if (u <= acc) { z = k; break; }
            }
        }

        LatentDraw ld;
        ld.z = z;
        ld.dz.resize(K);
        for (int k = 0; k < K; ++k) ld.dz[k] = v <= dt[k] ? 1 : 0;
        ld.d = ld.dz[z];

        ld.ydz.assign(2, std::vector<double>(K));
        for (int d = 0; d < 2; ++d) {
            for (int k = 0; k < K; ++k) {
                double err = (d == 1 && k == zmod) ? detail::modified_error(spec, w, eps)
                                                   : nz;
                double lift = spec.family == DgpSpec::Family::custom ? spec.effect * d : 0.0;
                ld.ydz[d][k] = lift + err;
            }
        }
        ld.y = ld.ydz[ld.d][ld.z];
        ds.rows.push_back({ld.y, ld.d, ld.z});
        latents.push_back(std::move(ld));
    }
    ds.validate();
    return {std::move(ds), std::move(latents)};
}

inline std::pair<Dataset, std::vector<LatentDraw>> draw(const DgpSpec& spec, int n,
                                                        std::uint64_t seed) {
    Rng rng(seed);
    return draw(spec, n, rng);
}

// Latent truth for a pair: the average causal response among the draws moved
// across each treatment step, with its step weights.
struct OracleTruth {
    double beta = 0.0;
    bool degenerate = false;       // no compliers: 0 by convention
    double complier_share = 0.0;   // E[D_{k'} - D_k] in treatment units
    std::vector<double> omega;     // per-step weights (binary: {1})
};

inline OracleTruth oracle_truth(const std::vector<LatentDraw>& latents, const PairId& pair,
                                const std::vector<double>& treatment_support = {0.0, 1.0}) {
    const int J = static_cast<int>(treatment_support.size());
    OracleTruth out;
    std::vector<double> num(J - 1, 0.0);
    std::vector<long> cnt(J - 1, 0);
    double denom = 0.0;
    for (const auto& ld : latents) {
        int dk = ld.dz[pair.k], dkp = ld.dz[pair.kprime];
        denom += treatment_support[dkp] - treatment_support[dk];
        for (int j = 1; j < J; ++j) {
            if (dkp >= j && j > dk) {
                num[j - 1] += ld.ydz[j][pair.kprime] - ld.ydz[j - 1][pair.kprime];
                cnt[j - 1] += 1;
            }
        }
    }
    out.complier_share = denom / latents.size();
    if (std::fabs(denom) < 1e-12) {
        out.degenerate = true;
        return out;
    }
    double total = 0.0;
    out.omega.resize(J - 1, 0.0);
    for (int j = 0; j < J - 1; ++j) total += cnt[j];
    for (int j = 0; j < J - 1; ++j) out.omega[j] = cnt[j] / total;
    double b = 0.0;
    for (int j = 0; j < J - 1; ++j)
        if (cnt[j] > 0) b += out.omega[j] * (num[j] / cnt[j]);
    out.beta = b;
    return out;
}

struct SimulationReport {
    std::string family;
    int n = 0;
    int reps = 0;
    std::uint64_t master_seed = 0;
    std::vector<double> tau_grid;
    std::vector<PairId> pairs;              // displayed upper-triangle pairs
    std::vector<std::vector<double>> freq;  // [tau][pair] selection frequency
    double runtime_seconds = 0.0;
};

// Per-pair selection frequencies of the falsification screen across
// replications, deterministic in the master seed.
inline SimulationReport mc_selection_table(const DgpSpec& spec, int n, int reps,
                                           const std::vector<double>& tau_grid,
                                           std::uint64_t master_seed) {
    if (reps < 1) throw std::invalid_argument("need at least one replication");
    spec.validate();
    auto start = std::chrono::steady_clock::now();

    SimulationReport rep;
    rep.family = spec.name();
    rep.n = n;
    rep.reps = reps;
    rep.master_seed = master_seed;
    rep.tau_grid = tau_grid;
    PairSet displayed = PairSet::universe(spec.K(), PairOrientation::upper_triangle);
    rep.pairs = displayed.pairs();
    std::vector<std::vector<long>> count(tau_grid.size(),
                                         std::vector<long>(displayed.size(), 0));

    SupConfig cfg;
    cfg.mode = TreatmentMode::binary;
    const bool subsampled = spec.family == DgpSpec::Family::qob || !spec.cal_z_probs.empty();
    cfg.variant = subsampled ? SupVariant::pos_part : SupVariant::abs_sup;

    for (int r = 0; r < reps; ++r) {
        Rng rng = Rng::stream(master_seed, static_cast<std::uint64_t>(r));
        auto [ds, latents] = draw(spec, n, rng);
        (void)latents;
        cfg.endpoints = subsampled ? EndpointPolicy::subsample(200, rng.next_u64())
                                   : EndpointPolicy::all_realized();
        GroupTables t(ds);
        std::vector<double> endpoints = select_endpoints(ds, cfg.endpoints);
        for (std::size_t p = 0; p < rep.pairs.size(); ++p) {
            SupStatistic s = sup_stat_pair(t, rep.pairs[p], endpoints, cfg);
            if (s.degenerate) continue;
            for (std::size_t ti = 0; ti < tau_grid.size(); ++ti)
                if (s.value <= tau_grid[ti]) count[ti][p] += 1;
        }
    }
    rep.freq.assign(tau_grid.size(), std::vector<double>(displayed.size(), 0.0));
    for (std::size_t ti = 0; ti < tau_grid.size(); ++ti)
        for (std::size_t p = 0; p < displayed.size(); ++p)
            rep.freq[ti][p] = static_cast<double>(count[ti][p]) / reps;
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

// Threshold tuning against the four application-calibrated designs built
// from the dataset's instrument margins and propensities.  Lives here rather
// than with the validity-set operations to keep the include graph acyclic.
struct TuneReport {
    std::vector<SimulationReport> designs;  // one per alternative-error variant
    std::vector<double> tau_grid;
    double recommended = 0.0;
    bool found = false;
    double floor = 0.98;
};

inline TuneReport tune_tau(const Dataset& ds, const std::vector<double>& tau_grid,
                           int reps, std::uint64_t master_seed, double floor = 0.98,
                           int n_override = 0) {
    if (ds.J() != 2)
        throw std::invalid_argument("tau tuning supports binary treatments only");
    if (ds.K() < 3)
        throw std::invalid_argument("tau tuning needs at least three instrument values");

    // Empirical calibration targets.
    std::vector<double> zp(ds.K(), 0.0), dt(ds.K(), 0.0);
    for (const auto& r : ds.rows) {
        zp[r.z] += 1.0;
        dt[r.z] += r.d;
    }
    for (int k = 0; k < ds.K(); ++k) {
        if (zp[k] > 0) dt[k] /= zp[k];
        zp[k] /= ds.n();
    }

    TuneReport out;
    out.tau_grid = tau_grid;
    out.floor = floor;
    const int n = n_override > 0 ? n_override : ds.n();
    PairSet valid;
    for (int v = 1; v <= 4; ++v) {
        DgpSpec spec;
        spec.family = DgpSpec::Family::qob;
        spec.variant = v;
        spec.cal_z_probs = zp;
        spec.cal_d_thresholds = dt;
        if (v == 1) valid = spec.valid_pairs();
        out.designs.push_back(mc_selection_table(spec, n, reps, tau_grid, master_seed));
    }
    for (std::size_t ti = 0; ti < tau_grid.size() && !out.found; ++ti) {
        bool ok = true;
        for (const auto& design : out.designs) {
            for (std::size_t p = 0; p < design.pairs.size(); ++p) {
                if (!valid.contains(design.pairs[p])) continue;
                if (design.freq[ti][p] < floor) { ok = false; break; }
            }
            if (!ok) break;
        }
        if (ok) {
            out.found = true;
            out.recommended = tau_grid[ti];
        }
    }
    return out;
}

}  // namespace vsiv

#endif  // VSIV_SIMULATE_HPP
