// estimate.hpp -- pairwise IV estimators on the selected validity set, their
// plug-in covariance, and the partial-validity (value-set) estimator.
//
// For a pair (k, k') and a prespecified instrument score g, the estimator is
// the two-group IV ratio on the pair-restricted subsample,
//     beta = [E(gY|A) - E(g|A)E(Y|A)] / [E(gD|A) - E(g|A)E(D|A)],
// with A = {Z in {z_k, z_k'}}; a first-stage denominator within 1e-12 of 0
// (or an empty group) yields 0 with a degeneracy flag.  The full vector
// stacks all K(K-1) ordered pairs and zeroes unselected entries.
//
// The covariance treats the selection as fixed: per pair, six sample moments
//     x = mean of (gY 1_A, Y 1_A, g 1_A, gD 1_A, D 1_A, 1_A)
// determine beta = f(x) with f(x) = (x1 x6 - x2 x3)/(x4 x6 - x5 x3); the
// plug-in sandwich is J Sigma_P J' with Sigma_P the sample covariance of the
// stacked per-observation moment vectors and J the block-diagonal gradient
// of f, rows zeroed for unselected or degenerate pairs.
//
// The partial-validity estimator applies the same f to moments restricted to
// a validity value set and decomposes (exactly, in sample) into a
// mu-weighted average of adjacent-pair ratios with weights summing to one.

#ifndef VSIV_ESTIMATE_HPP
#define VSIV_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"

namespace vsiv {

// Prespecified instrument score; empty table means g(z) = z (the dense index).
struct GFunction {
    std::vector<double> values;

    double operator()(int z) const {
        return values.empty() ? static_cast<double>(z) : values.at(z);
    }
    bool injective_on(const PairId& p) const { return (*this)(p.k) != (*this)(p.kprime); }
};

constexpr double kFirstStageTol = 1e-12;

// Six pair-restricted moments in the fixed order used throughout.
struct PairMoments {
    double gy = 0, y = 0, g = 0, gd = 0, d = 0, one = 0;  // means over all n
    long n_sub = 0;
};

inline PairMoments pair_moments(const Dataset& ds, const std::vector<int>& zset,
                                const GFunction& g) {
    PairMoments m;
    for (const auto& r : ds.rows) {
        if (std::find(zset.begin(), zset.end(), r.z) == zset.end()) continue;
        double gz = g(r.z);
        m.gy += gz * r.y;
        m.y += r.y;
        m.g += gz;
        m.gd += gz * r.d;
        m.d += r.d;
        m.one += 1.0;
        ++m.n_sub;
    }
    double n = static_cast<double>(ds.n());
    m.gy /= n;
    m.y /= n;
    m.g /= n;
    m.gd /= n;
    m.d /= n;
    m.one /= n;
    return m;
}

// beta = f(x) and its gradient, with D = x4 x6 - x5 x3.
inline double beta_from_moments(const PairMoments& m, bool* degenerate = nullptr) {
    double num = m.gy * m.one - m.y * m.g;
    double den = m.gd * m.one - m.d * m.g;
    // The first-stage cutoff applies to the subsample-scale centered moment.
    double fs = m.one > 0.0 ? den / (m.one * m.one) : 0.0;
    bool degen = m.one <= 0.0 || std::fabs(fs) < kFirstStageTol;
    if (degenerate) *degenerate = degen;
    return degen ? 0.0 : num / den;
}

inline Eigen::Matrix<double, 6, 1> beta_gradient(const PairMoments& m) {
    Eigen::Matrix<double, 6, 1> gr;
    double x1 = m.gy, x2 = m.y, x3 = m.g, x4 = m.gd, x5 = m.d, x6 = m.one;
    double N = x1 * x6 - x2 * x3;
    double D = x4 * x6 - x5 * x3;
    gr(0) = x6 / D;
    gr(1) = -x3 / D;
    gr(2) = (-x2 * x4 * x6 + x5 * x1 * x6) / (D * D);
    gr(3) = -N * x6 / (D * D);
    gr(4) = x3 * N / (D * D);
    gr(5) = (-x1 * x5 * x3 + x2 * x3 * x4) / (D * D);
    return gr;
}

struct BetaResult {
    double value = 0.0;
    bool degenerate = false;   // empty group or first stage below tolerance
    double first_stage = 0.0;  // centered cross-moment of g and D, pair scale
    long n_sub = 0;
};

// Raw pairwise IV ratio; the selection indicator is applied by the caller.
inline BetaResult beta_pair(const Dataset& ds, const PairId& pair, const GFunction& g) {
    PairMoments m = pair_moments(ds, {pair.k, pair.kprime}, g);
    BetaResult r;
    r.n_sub = m.n_sub;
    r.first_stage = m.one > 0.0 ? (m.gd * m.one - m.d * m.g) / (m.one * m.one) : 0.0;
    r.value = beta_from_moments(m, &r.degenerate);
    return r;
}

struct PairDiagnostics {
    PairId pair;
    bool selected = false;
    bool degenerate = false;
    double first_stage = 0.0;
    long n_sub = 0;
};

struct LateEstimate {
    std::vector<double> beta;          // K(K-1) entries in universe order
    Eigen::MatrixXd sigma;             // covariance of sqrt(n)(beta_hat - beta)
    PairSet universe;                  // both-directions pair universe
    PairSet selected;
    int n = 0;
    std::vector<PairDiagnostics> diagnostics;
};

// The estimator vector with zeros off the selected set.
inline LateEstimate beta_vector(const Dataset& ds, const PairSet& selected,
                                const GFunction& g) {
    LateEstimate est;
    est.universe = PairSet::universe(ds.K(), PairOrientation::both_directions);
    est.selected = selected;
    est.n = ds.n();
    est.beta.resize(est.universe.size(), 0.0);
    for (std::size_t i = 0; i < est.universe.size(); ++i) {
        const PairId& p = est.universe.pairs()[i];
        PairDiagnostics diag;
        diag.pair = p;
        diag.selected = selected.contains(p);
        BetaResult r = beta_pair(ds, p, g);
        diag.degenerate = r.degenerate;
        diag.first_stage = r.first_stage;
        diag.n_sub = r.n_sub;
        if (diag.selected) est.beta[i] = r.value;
        est.diagnostics.push_back(diag);
    }
    return est;
}

// Plug-in covariance of sqrt(n)(beta_hat - beta), selection treated as fixed.
inline Eigen::MatrixXd sigma_hat(const Dataset& ds, const PairSet& selected,
                                 const GFunction& g) {
    PairSet uni = PairSet::universe(ds.K(), PairOrientation::both_directions);
    const int P = static_cast<int>(uni.size());
    const int n = ds.n();
    const int dim = 6 * P;

    // Per-pair moment means and membership masks.
    std::vector<PairMoments> moms(P);
    std::vector<std::vector<char>> in_pair(P, std::vector<char>(ds.K(), 0));
    for (int p = 0; p < P; ++p) {
        const PairId& pr = uni.pairs()[p];
        moms[p] = pair_moments(ds, {pr.k, pr.kprime}, g);
        in_pair[p][pr.k] = in_pair[p][pr.kprime] = 1;
    }
    Eigen::VectorXd mean(dim);
    for (int p = 0; p < P; ++p) {
        mean(6 * p + 0) = moms[p].gy;
        mean(6 * p + 1) = moms[p].y;
        mean(6 * p + 2) = moms[p].g;
        mean(6 * p + 3) = moms[p].gd;
        mean(6 * p + 4) = moms[p].d;
        mean(6 * p + 5) = moms[p].one;
    }

    // Sample covariance of the stacked per-observation moment vector.
    Eigen::MatrixXd sigma_p = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd w(dim);
    for (const auto& r : ds.rows) {
        w.setZero();
        for (int p = 0; p < P; ++p) {
            if (!in_pair[p][r.z]) continue;
            double gz = g(r.z);
            w(6 * p + 0) = gz * r.y;
            w(6 * p + 1) = r.y;
            w(6 * p + 2) = gz;
            w(6 * p + 3) = gz * r.d;
            w(6 * p + 4) = r.d;
            w(6 * p + 5) = 1.0;
        }
        Eigen::VectorXd c = w - mean;
        sigma_p.noalias() += c * c.transpose();
    }
    sigma_p /= static_cast<double>(n);

    // Block-diagonal gradient, rows zeroed off the selected set.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(P, dim);
    for (int p = 0; p < P; ++p) {
        const PairId& pr = uni.pairs()[p];
        if (!selected.contains(pr)) continue;
        bool degen = false;
        beta_from_moments(moms[p], &degen);
        if (degen) continue;
        jac.block<1, 6>(p, 6 * p) = beta_gradient(moms[p]).transpose();
    }
    return jac * sigma_p * jac.transpose();
}

// Convenience: estimator vector plus covariance in one call.
inline LateEstimate estimate_lates(const Dataset& ds, const PairSet& selected,
                                   const GFunction& g) {
    LateEstimate est = beta_vector(ds, selected, g);
    est.sigma = sigma_hat(ds, selected, g);
    return est;
}

struct PartialEstimate {
    double theta1 = 0.0;
    double variance = 0.0;           // of sqrt(n)(theta_hat - theta)
    std::vector<int> value_set;      // instrument indices, ascending g order
    std::vector<double> weights;     // mu_m, m = 1..M-1
    bool degenerate = false;
};

// Partial-validity estimator over a validity value set of M >= 2 instrument
// values, with the mu-weight decomposition into adjacent-pair ratios.
inline PartialEstimate theta_partial(const Dataset& ds, std::vector<int> value_set,
                                     const GFunction& g) {
    std::sort(value_set.begin(), value_set.end());
    value_set.erase(std::unique(value_set.begin(), value_set.end()), value_set.end());
    const int M = static_cast<int>(value_set.size());
    if (M < 2) throw std::invalid_argument("value set needs at least two instrument values");
    std::sort(value_set.begin(), value_set.end(),
              [&](int a, int b) { return g(a) < g(b); });

    PartialEstimate out;
    out.value_set = value_set;

    PairMoments m = pair_moments(ds, value_set, g);
    out.theta1 = beta_from_moments(m, &out.degenerate);

    // Delta-method variance from the six value-set moments.
    {
        const int n = ds.n();
        Eigen::Matrix<double, 6, 6> sp = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> mean;
        mean << m.gy, m.y, m.g, m.gd, m.d, m.one;
        std::vector<char> in_set(ds.K(), 0);
        for (int z : value_set) in_set[z] = 1;
        Eigen::Matrix<double, 6, 1> w;
        for (const auto& r : ds.rows) {
            if (in_set[r.z]) {
                double gz = g(r.z);
                w << gz * r.y, r.y, gz, gz * r.d, r.d, 1.0;
            } else {
                w.setZero();
            }
            Eigen::Matrix<double, 6, 1> c = w - mean;
            sp.noalias() += c * c.transpose();
        }
        sp /= static_cast<double>(n);
        if (!out.degenerate) {
            Eigen::Matrix<double, 6, 1> gr = beta_gradient(m);
            out.variance = gr.transpose() * sp * gr;
        }
    }

    if (out.degenerate) return out;

    // mu-weights from observables: within-set Z shares, propensities
    // p(z) = E[D|Z=z], and the centered score g~(z) = g(z) - E[g | value set].
    std::vector<double> share(M, 0.0), prop(M, 0.0);
    long total = 0;
    for (const auto& r : ds.rows) {
        for (int i = 0; i < M; ++i) {
            if (r.z == value_set[i]) {
                share[i] += 1.0;
                prop[i] += r.d;
                break;
            }
        }
    }
    for (int i = 0; i < M; ++i) {
        total += static_cast<long>(share[i]);
        if (share[i] > 0) prop[i] /= share[i];
    }
    double gbar = 0.0;
    for (int i = 0; i < M; ++i) gbar += share[i] / total * g(value_set[i]);
    double denom = 0.0;
    for (int i = 0; i < M; ++i)
        denom += share[i] / total * prop[i] * (g(value_set[i]) - gbar);
    out.weights.resize(M - 1, 0.0);
    for (int mth = 0; mth < M - 1; ++mth) {
        double tail = 0.0;
        for (int l = mth; l < M - 1; ++l)
            tail += share[l + 1] / total * (g(value_set[l + 1]) - gbar);
        out.weights[mth] = (prop[mth + 1] - prop[mth]) * tail / denom;
    }
    return out;
}

}  // namespace vsiv

#endif  // VSIV_ESTIMATE_HPP
