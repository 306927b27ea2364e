// infer.hpp -- the two-part hypothesis test on functions of selected
// pairwise IV estimates.
//
// For a hypothesis R(beta_S) = 0 on the subvector beta_S of S pairs:
//   TS1 = prod_s 1{pair_s in the selected set}            (selection part)
//   TS2 = n R(b)' [R' I_S Sigma I_S' R'']^{-1} R(b)       (quadratic part)
// where I_S selects the S rows of the full pair universe.  The test rejects
// at level alpha when TS1 = 0 or TS2 exceeds the upper-alpha chi-square
// quantile with r = dim R degrees of freedom.

#ifndef VSIV_INFER_HPP
#define VSIV_INFER_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "vsiv/estimate.hpp"
#include "vsiv/pairs.hpp"

namespace vsiv {

struct Hypothesis {
    std::vector<PairId> pairs;  // the S pairs entering the restriction
    // Affine restriction R(b) = A b - rhs.  For a nonlinear smooth R, supply
    // value and Jacobian evaluators instead (A/rhs are then ignored).
    Eigen::MatrixXd A;     // r x S
    Eigen::VectorXd rhs;   // r
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;

    bool nonlinear() const { return static_cast<bool>(value); }
    int r() const { return nonlinear() ? -1 : static_cast<int>(A.rows()); }
};

struct TestResult {
    int ts1 = 1;
    double ts2 = 0.0;
    double critical = 0.0;
    double alpha = 0.05;
    bool reject = false;
    int df = 0;
};

// Upper-alpha quantile of chi-square with r degrees of freedom.
inline double chi2_quantile(int r, double alpha) {
    if (r < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
    boost::math::chi_squared dist(static_cast<double>(r));
    return boost::math::quantile(boost::math::complement(dist, alpha));
}

inline TestResult wald_test(const LateEstimate& est, const Hypothesis& hyp, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in (0,1)");
    const int S = static_cast<int>(hyp.pairs.size());
    if (S < 1) throw std::invalid_argument("hypothesis names no pairs");

    TestResult res;
    res.alpha = alpha;

    // Selection part and the subvector/covariance extraction.
    std::vector<int> idx(S);
    for (int s = 0; s < S; ++s) {
        int i = est.universe.index_of(hyp.pairs[s]);
        if (i < 0) throw std::invalid_argument("hypothesis pair outside the pair universe");
        idx[s] = i;
        if (!est.selected.contains(hyp.pairs[s])) res.ts1 = 0;
    }
    Eigen::VectorXd beta_s(S);
    Eigen::MatrixXd sigma_s(S, S);
    for (int a = 0; a < S; ++a) {
        beta_s(a) = est.beta[idx[a]];
        for (int b = 0; b < S; ++b) sigma_s(a, b) = est.sigma(idx[a], idx[b]);
    }

    Eigen::VectorXd rval;
    Eigen::MatrixXd rjac;
    if (hyp.nonlinear()) {
        if (!hyp.jacobian)
            throw std::invalid_argument("nonlinear hypothesis needs a Jacobian evaluator");
        rval = hyp.value(beta_s);
        rjac = hyp.jacobian(beta_s);
    } else {
        if (hyp.A.cols() != S || hyp.rhs.size() != hyp.A.rows())
            throw std::invalid_argument("restriction matrix dimensions disagree");
        rval = hyp.A * beta_s - hyp.rhs;
        rjac = hyp.A;
    }
    const int r = static_cast<int>(rjac.rows());
    res.df = r;
    {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(rjac);
        lu.setThreshold(1e-10);
        if (lu.rank() < r)
            throw std::runtime_error("restriction Jacobian is rank deficient (rank " +
                                     std::to_string(lu.rank()) + " < " + std::to_string(r) +
                                     ")");
    }

    Eigen::MatrixXd inner = rjac * sigma_s * rjac.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) {
        // With the selection part already failed the quadratic part cannot
        // change the decision, so a zeroed-out covariance block is harmless.
        if (res.ts1 == 0) {
            res.critical = chi2_quantile(r, alpha);
            res.reject = true;
            return res;
        }
        throw std::runtime_error(
            "inner covariance of the restriction is singular (rank " +
            std::to_string(lu.rank()) + " of " + std::to_string(r) + ")");
    }
    res.ts2 = static_cast<double>(est.n) * rval.dot(lu.solve(rval));
    res.critical = chi2_quantile(r, alpha);
    res.reject = res.ts1 == 0 || res.ts2 > res.critical;
    return res;
}

}  // namespace vsiv

#endif  // VSIV_INFER_HPP
