// sup_stats.hpp -- sup-type falsification statistics over interval-indexed
// function classes, for binary, ordered, and unordered treatments.
//
// For an instrument-value pair (k, k') the statistic is
//     sqrt(T_n) * | sup_{h in H} phi_hat(h) / max(xi0, sigma_hat(h)) |
// (abs variant) or sqrt(T_n) * max{sup, 0} (pos-part variant), where
//     phi_hat(h) = Phat(h g2)/Phat(g2) - Phat(h g1)/Phat(g1),
//     T_n        = n * prod_k Phat(Z = z_k),
// and H is a class of signed indicators of closed outcome intervals with
// realized endpoints, per treatment arm:
//   - binary D:    +1_{B x {0}} and -1_{B x {1}};
//   - ordered D:   the binary class on the extreme arms (low arm playing the
//                  role of 0, high arm of 1) plus first-order-stochastic-
//                  dominance thresholds +1_{R x (-inf, c]} at realized
//                  treatment values;
//   - unordered D: all 2^J sign patterns q over arms, statistic
//                  sqrt(T_n) * | min_q sup_{h in H_q} ... |.
//
// The fast path scans intervals over prefix-summed counts; under the
// all-realized-endpoints policy, grid points carrying no mass for the active
// arm in either group of the pair are skipped and a zero-ratio candidate is
// added whenever such a point exists (value-preserving: an interval made of
// zero-mass endpoints either trims to one with active endpoints and identical
// counts, or is itself zero-mass with ratio exactly 0).  brute_force_sup is
// an independent oracle that counts rows directly, with no prefix sums.
//
// Reproducibility contract: the fast path, the oracle, and witness
// re-evaluation all reduce an interval to the same integer counts and then
// apply the same scalar expressions, so their results compare equal with ==.

#ifndef VSIV_SUP_STATS_HPP
#define VSIV_SUP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"
#include "vsiv/rng.hpp"

namespace vsiv {

enum class TreatmentMode { binary, ordered, unordered };
enum class SupVariant { abs_sup, pos_part };

// Which outcome values may serve as interval endpoints.
struct EndpointPolicy {
    enum class Kind { all, subsample };
    Kind kind = Kind::all;
    int m = 200;             // subsample size (rows drawn without replacement)
    std::uint64_t seed = 0;  // subsample seed

    static EndpointPolicy all_realized() { return {}; }
    static EndpointPolicy subsample(int m, std::uint64_t seed) {
        EndpointPolicy p;
        p.kind = Kind::subsample;
        p.m = m;
        p.seed = seed;
        return p;
    }
};

struct SupConfig {
    TreatmentMode mode = TreatmentMode::binary;
    SupVariant variant = SupVariant::abs_sup;
    EndpointPolicy endpoints;
    double xi0 = 0.001;
};

// One element of the function class.
struct HFunction {
    enum class Kind { signed_interval, fosd_threshold };
    Kind kind = Kind::signed_interval;
    int d = 0;        // treatment arm index (signed_interval)
    double a = 0.0;   // closed interval [a, b]
    double b = 0.0;
    int sign = +1;    // +1 or -1 (signed_interval); fosd is always +1
    int c_index = 0;  // fosd: indicator of D <= treatment_support[c_index]
};

struct SupStatistic {
    PairId pair;
    double value = 0.0;    // the thresholded comparand, >= 0
    double raw_sup = 0.0;  // sup (binary/ordered) or min-over-patterns sup
    HFunction witness;
    SupVariant variant = SupVariant::abs_sup;
    double t_n = 0.0;
    bool degenerate = false;    // an instrument value has no observations
    std::uint32_t pattern = 0;  // unordered: argmin sign pattern bitmask
};

// Sorted distinct endpoint values under the given policy.
inline std::vector<double> select_endpoints(const Dataset& ds, const EndpointPolicy& p) {
    std::vector<double> e;
    if (p.kind == EndpointPolicy::Kind::all || p.m >= ds.n()) {
        e.reserve(ds.rows.size());
        for (const auto& r : ds.rows) e.push_back(r.y);
    } else {
        if (p.m < 1) throw std::invalid_argument("endpoint subsample size must be >= 1");
        // Partial Fisher-Yates over row indices, deterministic in the seed.
        std::vector<int> idx(ds.rows.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        Rng rng(p.seed);
        for (int i = 0; i < p.m; ++i) {
            int j = i + static_cast<int>(rng.next_u64() % (idx.size() - i));
            std::swap(idx[i], idx[j]);
            e.push_back(ds.rows[idx[i]].y);
        }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

namespace detail {

// lambda = T_n / n = prod_k Phat(Z = z_k), accumulated in ascending k so all
// code paths round identically.
inline double lambda_hat(const std::vector<int>& nz, int n) {
    double lam = 1.0;
    for (int c : nz) lam *= static_cast<double>(c) / n;
    return lam;
}

inline double sigma2_from_counts(int c1, int n1, int c2, int n2, int n, double lambda) {
    double u1 = n1 > 0 ? static_cast<double>(c1) / n1 : 0.0;
    double u2 = n2 > 0 ? static_cast<double>(c2) / n2 : 0.0;
    double p1 = static_cast<double>(n1) / n;
    double p2 = static_cast<double>(n2) / n;
    return lambda * ((p2 > 0.0 ? u2 * (1.0 - u2) / p2 : 0.0) +
                     (p1 > 0.0 ? u1 * (1.0 - u1) / p1 : 0.0));
}

// Ratio w = (u2 - u1)/max(xi0, sigma_hat) from integer counts.  The single
// scalar kernel shared by the fast path, the oracle, and witness evaluation.
inline double ratio_from_counts(int c1, int n1, int c2, int n2, int n, double lambda,
                                double xi0) {
    double u1 = n1 > 0 ? static_cast<double>(c1) / n1 : 0.0;
    double u2 = n2 > 0 ? static_cast<double>(c2) / n2 : 0.0;
    double den = std::max(xi0, std::sqrt(sigma2_from_counts(c1, n1, c2, n2, n, lambda)));
    return (u2 - u1) / den;
}

// Extremes of w(B) over intervals B for one treatment arm, in the canonical
// orientation g1 = klow, g2 = khigh.  Endpoint indices -1 mark the zero-ratio
// stand-in for skipped zero-mass intervals.
struct ArmExtremes {
    double wmax = 0.0;
    double wmin = 0.0;
    int max_i = -1, max_j = -1;
    int min_i = -1, min_j = -1;
    bool zero_exists = false;
    double zero_a = 0.0;  // witness endpoint for the zero candidate
};

// Cell counts relative to an endpoint list: le[j] = #{y <= e[j]},
// lt[j] = #{y < e[j]}.
inline void prefix_counts(const GroupTables& t, int d, int z, const std::vector<double>& e,
                          std::vector<int>& le, std::vector<int>& lt) {
    le.resize(e.size());
    lt.resize(e.size());
    for (std::size_t j = 0; j < e.size(); ++j) {
        le[j] = t.cum_count(d, z, t.index_le(e[j]));
        lt[j] = t.cum_count(d, z, t.index_lt(e[j]));
    }
}

inline ArmExtremes scan_arm(const GroupTables& t, int d, int zlow, int zhigh,
                            const std::vector<double>& endpoints, bool reduce,
                            double lambda, double xi0,
                            std::vector<double>& active_endpoints) {
    const int n = t.n();
    const int n1 = t.group_count(zlow);
    const int n2 = t.group_count(zhigh);

    ArmExtremes ext;
    std::vector<double>& e = active_endpoints;
    e.clear();
    if (reduce) {
        for (double v : endpoints) {
            int gi = t.grid_index(v);
            if (t.point_counts(d, zlow)[gi] + t.point_counts(d, zhigh)[gi] > 0) {
                e.push_back(v);
            } else if (!ext.zero_exists) {
                ext.zero_exists = true;
                ext.zero_a = v;
            }
        }
    } else {
        e = endpoints;
    }

    bool any = false;
    if (!e.empty()) {
        std::vector<int> le1, lt1, le2, lt2;
        prefix_counts(t, d, zlow, e, le1, lt1);
        prefix_counts(t, d, zhigh, e, le2, lt2);
        const int M = static_cast<int>(e.size());
        for (int i = 0; i < M; ++i) {
            const int b1 = lt1[i], b2 = lt2[i];
            for (int j = i; j < M; ++j) {
                const double w =
                    ratio_from_counts(le1[j] - b1, n1, le2[j] - b2, n2, n, lambda, xi0);
                if (!any) {
                    any = true;
                    ext.wmax = ext.wmin = w;
                    ext.max_i = ext.min_i = i;
                    ext.max_j = ext.min_j = j;
                } else {
                    if (w > ext.wmax) { ext.wmax = w; ext.max_i = i; ext.max_j = j; }
                    if (w < ext.wmin) { ext.wmin = w; ext.min_i = i; ext.min_j = j; }
                }
            }
        }
    }
    if (ext.zero_exists) {
        if (!any) {
            ext.wmax = ext.wmin = 0.0;
            ext.max_i = ext.max_j = ext.min_i = ext.min_j = -1;
        } else {
            if (0.0 > ext.wmax) { ext.wmax = 0.0; ext.max_i = ext.max_j = -1; }
            if (0.0 < ext.wmin) { ext.wmin = 0.0; ext.min_i = ext.min_j = -1; }
        }
    }
    return ext;
}

// Everything orientation-independent about the unordered pair {klow, khigh}.
struct PairScan {
    int klow = 0, khigh = 0;
    double lambda = 0.0, tn = 0.0, xi0 = 0.0;
    bool degenerate = false;
    TreatmentMode mode = TreatmentMode::binary;
    struct Arm {
        int d = 0;
        int class_sign = +1;  // sign of the class element (binary/ordered)
        ArmExtremes ext;
        std::vector<double> endpoints;  // active endpoints of this arm's scan
    };
    std::vector<Arm> arms;
    struct Threshold {
        int c_index = 0;
        double w = 0.0;  // (u2 - u1)/den in canonical orientation
    };
    std::vector<Threshold> thresholds;
};

inline PairScan scan_pair(const GroupTables& t, int klow, int khigh,
                          const std::vector<double>& endpoints, const SupConfig& cfg) {
    if (t.K() < 2) throw std::invalid_argument("need at least two instrument values");
    if (cfg.mode == TreatmentMode::binary && t.J() != 2)
        throw std::invalid_argument("binary mode requires exactly two treatment values");
    if (cfg.mode == TreatmentMode::unordered && t.J() > 20)
        throw std::invalid_argument("unordered mode: treatment support too large (2^J patterns)");

    PairScan s;
    s.klow = klow;
    s.khigh = khigh;
    s.xi0 = cfg.xi0;
    std::vector<int> nz(t.K());
    for (int k = 0; k < t.K(); ++k) nz[k] = t.group_count(k);
    s.lambda = lambda_hat(nz, t.n());
    s.tn = t.n() * s.lambda;
    s.degenerate = t.group_count(klow) == 0 || t.group_count(khigh) == 0;
    s.mode = cfg.mode;

    const bool reduce = cfg.endpoints.kind == EndpointPolicy::Kind::all;
    std::vector<int> arm_list;
    std::vector<int> sign_list;
    if (cfg.mode == TreatmentMode::unordered) {
        for (int d = 0; d < t.J(); ++d) {
            arm_list.push_back(d);
            sign_list.push_back(+1);  // both signs assembled via patterns
        }
    } else {
        arm_list = {0, t.J() - 1};
        sign_list = {+1, -1};
    }
    for (std::size_t a = 0; a < arm_list.size(); ++a) {
        PairScan::Arm arm;
        arm.d = arm_list[a];
        arm.class_sign = sign_list[a];
        arm.ext = scan_arm(t, arm.d, klow, khigh, endpoints, reduce, s.lambda, cfg.xi0,
                           arm.endpoints);
        s.arms.push_back(std::move(arm));
    }
    if (cfg.mode == TreatmentMode::ordered) {
        const int n1 = t.group_count(klow), n2 = t.group_count(khigh);
        int c1 = 0, c2 = 0;
        for (int c = 0; c < t.J(); ++c) {
            c1 += t.cell_count(c, klow);
            c2 += t.cell_count(c, khigh);
            s.thresholds.push_back(
                {c, ratio_from_counts(c1, n1, c2, n2, t.n(), s.lambda, cfg.xi0)});
        }
    }
    return s;
}

inline HFunction interval_witness(const PairScan::Arm& arm, int i, int j, int sign) {
    HFunction h;
    h.kind = HFunction::Kind::signed_interval;
    h.d = arm.d;
    h.sign = sign;
    if (i < 0) {
        h.a = h.b = arm.ext.zero_a;
    } else {
        h.a = arm.endpoints[i];
        h.b = arm.endpoints[j];
    }
    return h;
}

// Assemble the statistic for orientation (g1, g2) = flipped ? (khigh, klow)
// : (klow, khigh).  Flipping the orientation negates w, so arm sups swap
// between wmax and -wmin.
inline SupStatistic assemble(const PairScan& s, bool flipped, const SupConfig& cfg) {
    SupStatistic out;
    out.pair = flipped ? PairId{s.khigh, s.klow} : PairId{s.klow, s.khigh};
    out.variant = cfg.variant;
    out.t_n = s.tn;
    out.degenerate = s.degenerate;

    // Per-arm sup of sign*w and its witness, for a requested sign.
    auto arm_sup = [&](const PairScan::Arm& arm, int sign) {
        bool take_max = (sign == +1) != flipped;
        double v = take_max ? arm.ext.wmax : -arm.ext.wmin;
        int i = take_max ? arm.ext.max_i : arm.ext.min_i;
        int j = take_max ? arm.ext.max_j : arm.ext.min_j;
        return std::pair<double, HFunction>(v, interval_witness(arm, i, j, sign));
    };

    if (s.mode == TreatmentMode::unordered) {
        const std::uint32_t npat = 1u << s.arms.size();
        bool have = false;
        for (std::uint32_t q = 0; q < npat; ++q) {
            double sup_q = 0.0;
            HFunction wit_q;
            bool any = false;
            for (std::size_t a = 0; a < s.arms.size(); ++a) {
                int sign = (q >> a) & 1u ? -1 : +1;
                auto [v, h] = arm_sup(s.arms[a], sign);
                if (!any || v > sup_q) {
                    any = true;
                    sup_q = v;
                    wit_q = h;
                }
            }
            if (!have || sup_q < out.raw_sup) {
                have = true;
                out.raw_sup = sup_q;
                out.witness = wit_q;
                out.pattern = q;
            }
        }
    } else {
        bool have = false;
        auto consider = [&](double v, const HFunction& h) {
            if (!have || v > out.raw_sup) {
                have = true;
                out.raw_sup = v;
                out.witness = h;
            }
        };
        for (const auto& arm : s.arms) {
            auto [v, h] = arm_sup(arm, arm.class_sign);
            consider(v, h);
        }
        for (const auto& thr : s.thresholds) {
            HFunction h;
            h.kind = HFunction::Kind::fosd_threshold;
            h.c_index = thr.c_index;
            h.sign = +1;
            consider(flipped ? -thr.w : thr.w, h);
        }
    }

    double comp = cfg.variant == SupVariant::abs_sup ? std::fabs(out.raw_sup)
                                                     : std::max(out.raw_sup, 0.0);
    out.value = std::sqrt(s.tn) * comp;
    return out;
}

}  // namespace detail

// phi_hat(h, pair) = Phat(h g2)/Phat(g2) - Phat(h g1)/Phat(g1) with
// g1 = 1{Z = z_k}, g2 = 1{Z = z_k'}; empty groups contribute 0 by convention.
inline double phi_hat(const GroupTables& t, const HFunction& h, const PairId& pair,
                      bool* degenerate = nullptr) {
    const int n1 = t.group_count(pair.k);
    const int n2 = t.group_count(pair.kprime);
    if (degenerate) *degenerate = (n1 == 0 || n2 == 0);
    int c1 = 0, c2 = 0;
    if (h.kind == HFunction::Kind::signed_interval) {
        c1 = t.interval_count(h.d, pair.k, h.a, h.b);
        c2 = t.interval_count(h.d, pair.kprime, h.a, h.b);
    } else {
        for (int d = 0; d <= h.c_index; ++d) {
            c1 += t.cell_count(d, pair.k);
            c2 += t.cell_count(d, pair.kprime);
        }
    }
    double u1 = n1 > 0 ? static_cast<double>(c1) / n1 : 0.0;
    double u2 = n2 > 0 ? static_cast<double>(c2) / n2 : 0.0;
    return h.sign * (u2 - u1);
}

// sigma_hat^2(h, pair); h enters only through its (unsigned) support.
inline double sigma_hat_sq(const GroupTables& t, const HFunction& h, const PairId& pair) {
    const int n1 = t.group_count(pair.k);
    const int n2 = t.group_count(pair.kprime);
    int c1 = 0, c2 = 0;
    if (h.kind == HFunction::Kind::signed_interval) {
        c1 = t.interval_count(h.d, pair.k, h.a, h.b);
        c2 = t.interval_count(h.d, pair.kprime, h.a, h.b);
    } else {
        for (int d = 0; d <= h.c_index; ++d) {
            c1 += t.cell_count(d, pair.k);
            c2 += t.cell_count(d, pair.kprime);
        }
    }
    std::vector<int> nz(t.K());
    for (int k = 0; k < t.K(); ++k) nz[k] = t.group_count(k);
    return detail::sigma2_from_counts(c1, n1, c2, n2, t.n(), detail::lambda_hat(nz, t.n()));
}

// Normalized ratio phi_hat/(xi0 v sigma_hat) for a single h; reproduces the
// raw_sup of a statistic when given its witness.
inline double witness_ratio(const GroupTables& t, const HFunction& h, const PairId& pair,
                            double xi0 = 0.001) {
    double den = std::max(xi0, std::sqrt(sigma_hat_sq(t, h, pair)));
    return phi_hat(t, h, pair) / den;
}

// Sup statistic for one oriented pair over a shared endpoint list.
inline SupStatistic sup_stat_pair(const GroupTables& t, const PairId& pair,
                                  const std::vector<double>& endpoints,
                                  const SupConfig& cfg) {
    bool flipped = pair.k > pair.kprime;
    int klow = flipped ? pair.kprime : pair.k;
    int khigh = flipped ? pair.k : pair.kprime;
    auto scan = detail::scan_pair(t, klow, khigh, endpoints, cfg);
    return detail::assemble(scan, flipped, cfg);
}

// Convenience overload: selects endpoints from the dataset per the policy.
inline SupStatistic sup_stat_pair(const GroupTables& t, const Dataset& ds,
                                  const PairId& pair, const SupConfig& cfg) {
    return sup_stat_pair(t, pair, select_endpoints(ds, cfg.endpoints), cfg);
}

// Statistics for the whole pair universe, scanning each unordered pair once
// (both orientations share the scan).  Order matches PairSet::universe.
inline std::vector<SupStatistic> sup_stats_universe(const GroupTables& t,
                                                    const std::vector<double>& endpoints,
                                                    const SupConfig& cfg,
                                                    PairOrientation orient) {
    PairSet uni = PairSet::universe(t.K(), orient);
    std::vector<SupStatistic> out(uni.size());
    for (int k = 0; k < t.K(); ++k) {
        for (int kp = k + 1; kp < t.K(); ++kp) {
            auto scan = detail::scan_pair(t, k, kp, endpoints, cfg);
            int fwd = uni.index_of({k, kp});
            if (fwd >= 0) out[fwd] = detail::assemble(scan, false, cfg);
            if (orient == PairOrientation::both_directions) {
                int rev = uni.index_of({kp, k});
                out[rev] = detail::assemble(scan, true, cfg);
            }
        }
    }
    return out;
}

// Independent oracle: enumerates every interval over the endpoint list and
// counts rows directly.  Guarded to small samples.
inline SupStatistic brute_force_sup(const Dataset& ds, const PairId& pair,
                                    const SupConfig& cfg) {
    if (ds.n() > 500) throw std::invalid_argument("brute_force_sup: n > 500 guard");
    if (cfg.mode == TreatmentMode::binary && ds.J() != 2)
        throw std::invalid_argument("binary mode requires exactly two treatment values");

    const int n = ds.n();
    std::vector<int> nz(ds.K(), 0);
    for (const auto& r : ds.rows) nz[r.z] += 1;
    const double lambda = detail::lambda_hat(nz, n);
    const int n1 = nz[pair.k], n2 = nz[pair.kprime];
    std::vector<double> e = select_endpoints(ds, cfg.endpoints);

    auto interval_counts = [&](int d, double a, double b, int& c1, int& c2) {
        c1 = c2 = 0;
        for (const auto& r : ds.rows) {
            if (r.d != d || r.y < a || r.y > b) continue;
            if (r.z == pair.k) ++c1;
            if (r.z == pair.kprime) ++c2;
        }
    };

    struct ArmBest {
        double wmax = 0.0, wmin = 0.0;
        HFunction hmax, hmin;
        bool any = false;
    };
    auto scan = [&](int d) {
        ArmBest best;
        for (std::size_t i = 0; i < e.size(); ++i) {
            for (std::size_t j = i; j < e.size(); ++j) {
                int c1, c2;
                interval_counts(d, e[i], e[j], c1, c2);
                double w = detail::ratio_from_counts(c1, n1, c2, n2, n, lambda, cfg.xi0);
                HFunction h;
                h.d = d;
                h.a = e[i];
                h.b = e[j];
                if (!best.any) {
                    best.any = true;
                    best.wmax = best.wmin = w;
                    best.hmax = best.hmin = h;
                } else {
                    if (w > best.wmax) { best.wmax = w; best.hmax = h; }
                    if (w < best.wmin) { best.wmin = w; best.hmin = h; }
                }
            }
        }
        return best;
    };

    SupStatistic out;
    out.pair = pair;
    out.variant = cfg.variant;
    out.t_n = n * lambda;
    out.degenerate = n1 == 0 || n2 == 0;

    if (cfg.mode == TreatmentMode::unordered) {
        std::vector<ArmBest> arms;
        for (int d = 0; d < ds.J(); ++d) arms.push_back(scan(d));
        bool have = false;
        for (std::uint32_t q = 0; q < (1u << ds.J()); ++q) {
            double sup_q = 0.0;
            HFunction wit_q;
            bool any = false;
            for (int d = 0; d < ds.J(); ++d) {
                int sign = (q >> d) & 1u ? -1 : +1;
                double v = sign == +1 ? arms[d].wmax : -arms[d].wmin;
                HFunction h = sign == +1 ? arms[d].hmax : arms[d].hmin;
                h.sign = sign;
                if (!any || v > sup_q) {
                    any = true;
                    sup_q = v;
                    wit_q = h;
                }
            }
            if (!have || sup_q < out.raw_sup) {
                have = true;
                out.raw_sup = sup_q;
                out.witness = wit_q;
                out.pattern = q;
            }
        }
    } else {
        bool have = false;
        auto consider = [&](double v, const HFunction& h) {
            if (!have || v > out.raw_sup) {
                have = true;
                out.raw_sup = v;
                out.witness = h;
            }
        };
        {
            ArmBest low = scan(0);
            HFunction h = low.hmax;
            h.sign = +1;
            consider(low.wmax, h);
        }
        {
            ArmBest high = scan(ds.J() - 1);
            HFunction h = high.hmin;
            h.sign = -1;
            consider(-high.wmin, h);
        }
        if (cfg.mode == TreatmentMode::ordered) {
            int c1 = 0, c2 = 0;
            std::vector<int> cd1(ds.J(), 0), cd2(ds.J(), 0);
            for (const auto& r : ds.rows) {
                if (r.z == pair.k) cd1[r.d] += 1;
                if (r.z == pair.kprime) cd2[r.d] += 1;
            }
            for (int c = 0; c < ds.J(); ++c) {
                c1 += cd1[c];
                c2 += cd2[c];
                HFunction h;
                h.kind = HFunction::Kind::fosd_threshold;
                h.c_index = c;
                h.sign = +1;
                consider(detail::ratio_from_counts(c1, n1, c2, n2, n, lambda, cfg.xi0), h);
            }
        }
    }

    double comp = cfg.variant == SupVariant::abs_sup ? std::fabs(out.raw_sup)
                                                     : std::max(out.raw_sup, 0.0);
    out.value = std::sqrt(out.t_n) * comp;
    return out;
}

}  // namespace vsiv

#endif  // VSIV_SUP_STATS_HPP
