// unordered.hpp -- response-type machinery and counterfactual identification
// for unordered treatments.
//
// A response matrix R (K rows, one per instrument value; columns are the
// admissible response types) restricted to a pair (k, k') and collapsed to
// its unique columns gives a 2 x L matrix KR.  Per treatment arm d the
// binary matrix B_d marks which response types take d at each of the two
// instrument values; pairwise unordered monotonicity makes every B_d lonesum
// (uniquely determined by its row and column sums), and then
//     P(type in Sigma_d(t))    = b_d(t) B_d+ P_Z(d)
//     E[kappa(Y_d) | Sigma_d(t)] = b_d(t) B_d+ Q_Z(d) / b_d(t) B_d+ P_Z(d)
// where Sigma_d(t) collects the types whose B_d column sums to t, b_d(t) is
// its indicator vector, B_d+ the Moore-Penrose pseudo-inverse, and
// P_Z(d), Q_Z(d) stack conditional-on-instrument moments for the two values.
// Mean treatment contrasts difference two such conditional means and are set
// to zero unless the strata coincide set-wise and the pair is selected.

#ifndef VSIV_UNORDERED_HPP
#define VSIV_UNORDERED_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"

namespace vsiv {

// K x N_S array of treatment indices; column = response type.
struct ResponseMatrix {
    int K = 0;
    std::vector<std::vector<int>> columns;  // each of length K

    void validate(int J) const {
        if (K < 2) throw std::invalid_argument("response matrix needs K >= 2 rows");
        for (const auto& c : columns) {
            if (static_cast<int>(c.size()) != K)
                throw std::invalid_argument("response-type column length differs from K");
            for (int d : c)
                if (d < 0 || d >= J)
                    throw std::invalid_argument("response type indexes outside treatment support");
        }
        for (std::size_t a = 0; a < columns.size(); ++a)
            for (std::size_t b = a + 1; b < columns.size(); ++b)
                if (columns[a] == columns[b])
                    throw std::invalid_argument("duplicate response-type columns");
    }
};

// Pair restriction: rows k, k' with duplicate columns collapsed, preserving
// first-occurrence order.
struct PairResponse {
    PairId pair;
    std::vector<std::array<int, 2>> kr;  // L unique columns (values at k, k')
};

inline PairResponse k_transform(const ResponseMatrix& R, const PairId& pair) {
    if (pair.k >= pair.kprime)
        throw std::invalid_argument("pair restriction requires k < k'");
    PairResponse pr;
    pr.pair = pair;
    for (const auto& col : R.columns) {
        std::array<int, 2> c = {col[pair.k], col[pair.kprime]};
        if (std::find(pr.kr.begin(), pr.kr.end(), c) == pr.kr.end()) pr.kr.push_back(c);
    }
    return pr;
}

// Binary arm matrix B_d: B_d(m, l) = 1{kr(m, l) = d}.
inline Eigen::MatrixXd arm_matrix(const PairResponse& pr, int d) {
    Eigen::MatrixXd B(2, pr.kr.size());
    for (std::size_t l = 0; l < pr.kr.size(); ++l) {
        B(0, l) = pr.kr[l][0] == d ? 1.0 : 0.0;
        B(1, l) = pr.kr[l][1] == d ? 1.0 : 0.0;
    }
    return B;
}

// A binary 2 x L matrix is lonesum iff it contains no 2 x 2 identity or
// anti-identity submatrix; equivalently one row's support contains the
// other's.
inline bool is_lonesum(const Eigen::MatrixXd& B) {
    if (B.rows() != 2) throw std::invalid_argument("is_lonesum expects a 2 x L matrix");
    bool top_minus_bottom = false, bottom_minus_top = false;
    for (int l = 0; l < B.cols(); ++l) {
        bool a = B(0, l) != 0.0, b = B(1, l) != 0.0;
        if (a && !b) top_minus_bottom = true;
        if (b && !a) bottom_minus_top = true;
    }
    return !(top_minus_bottom && bottom_minus_top);
}

// Moore-Penrose pseudo-inverse of a binary 2 x L matrix.  Lonesum matrices
// use the full-rank factorization B = C D (C = unique nonzero columns, D =
// membership indicators), B+ = D'(DD')^{-1}(C'C)^{-1}C'; other matrices fall
// back to an SVD pseudo-inverse.
inline Eigen::MatrixXd pinv_binary(const Eigen::MatrixXd& B) {
    if (B.rows() != 2) throw std::invalid_argument("pinv_binary expects a 2 x L matrix");
    const int L = static_cast<int>(B.cols());
    if (B.isZero(0.0)) return Eigen::MatrixXd::Zero(L, 2);

    if (is_lonesum(B)) {
        // Unique nonzero column types in first-occurrence order.
        std::vector<std::array<double, 2>> types;
        std::vector<int> type_of(L, -1);
        for (int l = 0; l < L; ++l) {
            if (B(0, l) == 0.0 && B(1, l) == 0.0) continue;
            std::array<double, 2> c = {B(0, l), B(1, l)};
            auto it = std::find(types.begin(), types.end(), c);
            if (it == types.end()) {
                types.push_back(c);
                type_of[l] = static_cast<int>(types.size()) - 1;
            } else {
                type_of[l] = static_cast<int>(it - types.begin());
            }
        }
        const int r = static_cast<int>(types.size());
        Eigen::MatrixXd C(2, r), D = Eigen::MatrixXd::Zero(r, L);
        for (int j = 0; j < r; ++j) {
            C(0, j) = types[j][0];
            C(1, j) = types[j][1];
        }
        for (int l = 0; l < L; ++l)
            if (type_of[l] >= 0) D(type_of[l], l) = 1.0;
        Eigen::MatrixXd ddt = (D * D.transpose()).inverse();
        Eigen::MatrixXd ctc = (C.transpose() * C).inverse();
        return D.transpose() * ddt * ctc * C.transpose();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    return svd.solve(Eigen::MatrixXd::Identity(2, 2));
}

// Columns of kr whose arm-d column sum equals t.
inline std::vector<int> sigma_set(const PairResponse& pr, int d, int t) {
    std::vector<int> out;
    for (std::size_t l = 0; l < pr.kr.size(); ++l) {
        int s = (pr.kr[l][0] == d ? 1 : 0) + (pr.kr[l][1] == d ? 1 : 0);
        if (s == t) out.push_back(static_cast<int>(l));
    }
    return out;
}

struct Counterfactual {
    double probability = 0.0;
    double mean = 0.0;
    bool degenerate = false;    // estimated probability <= 0: mean undefined
    bool inconsistent = false;  // B_d not lonesum despite passing the screen
};

// Plug-in response-type probability and counterfactual mean for stratum
// Sigma_d(t) of the pair.
inline Counterfactual counterfactuals(const Dataset& ds, const PairId& pair,
                                      const ResponseMatrix& R, int d, int t,
                                      const std::function<double(double)>& kappa = {}) {
    if (t < 0 || t > 2) throw std::invalid_argument("column sum t must be in {0, 1, 2}");
    PairResponse pr = k_transform(R, pair);
    Eigen::MatrixXd B = arm_matrix(pr, d);

    Counterfactual out;
    if (!is_lonesum(B)) {
        out.inconsistent = true;
        return out;
    }
    Eigen::MatrixXd Bp = pinv_binary(B);
    Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(B.cols());
    for (int l : sigma_set(pr, d, t)) b(l) = 1.0;

    // Conditional-on-instrument moments for the two values.
    long n1 = 0, n2 = 0;
    double p1 = 0, p2 = 0, q1 = 0, q2 = 0;
    for (const auto& r : ds.rows) {
        double ky = kappa ? kappa(r.y) : r.y;
        if (r.z == pair.k) {
            ++n1;
            if (r.d == d) {
                p1 += 1.0;
                q1 += ky;
            }
        } else if (r.z == pair.kprime) {
            ++n2;
            if (r.d == d) {
                p2 += 1.0;
                q2 += ky;
            }
        }
    }
    Eigen::Vector2d P(n1 > 0 ? p1 / n1 : 0.0, n2 > 0 ? p2 / n2 : 0.0);
    Eigen::Vector2d Q(n1 > 0 ? q1 / n1 : 0.0, n2 > 0 ? q2 / n2 : 0.0);

    out.probability = (b * Bp * P)(0);
    double qc = (b * Bp * Q)(0);
    if (out.probability <= 1e-12) {
        out.degenerate = true;
    } else {
        out.mean = qc / out.probability;
    }
    return out;
}

struct MteQuery {
    PairId pair;
    int d = 0, dprime = 0;
    int t = 1, tprime = 1;
};

struct MteResult {
    MteQuery query;
    double value = 0.0;
    bool zeroed = false;  // unselected pair or unequal strata
    bool inconsistent = false;
};

// Mean treatment contrasts E[kappa(Y_d)|stratum] - E[kappa(Y_d')|stratum],
// zero unless Sigma_d(t) = Sigma_d'(t') set-wise and the pair is selected.
inline std::vector<MteResult> mte_unordered(const Dataset& ds, const PairSet& selected,
                                            const ResponseMatrix& R,
                                            const std::vector<MteQuery>& queries,
                                            const std::function<double(double)>& kappa = {}) {
    std::vector<MteResult> out;
    for (const auto& q : queries) {
        MteResult res;
        res.query = q;
        PairResponse pr = k_transform(R, q.pair);
        std::vector<int> s1 = sigma_set(pr, q.d, q.t);
        std::vector<int> s2 = sigma_set(pr, q.dprime, q.tprime);
        std::sort(s1.begin(), s1.end());
        std::sort(s2.begin(), s2.end());
        if (!selected.contains(q.pair) || s1 != s2 || s1.empty()) {
            res.zeroed = true;
        } else {
            Counterfactual a = counterfactuals(ds, q.pair, R, q.d, q.t, kappa);
            Counterfactual b = counterfactuals(ds, q.pair, R, q.dprime, q.tprime, kappa);
            res.inconsistent = a.inconsistent || b.inconsistent;
            if (res.inconsistent || a.degenerate || b.degenerate) {
                res.zeroed = true;
            } else {
                res.value = a.mean - b.mean;
            }
        }
        out.push_back(res);
    }
    return out;
}

// Stacked moment vector W = (Z shares; joint P(D=d, Z=z) blocks; joint
// kappa-moment blocks) and its sample covariance.
struct MomentStack {
    Eigen::VectorXd w;       // K + J*K + J*K entries
    Eigen::MatrixXd sigma;   // sample covariance of the per-row vectors
    int K = 0, J = 0;

    int z_index(int z) const { return z; }
    int p_index(int d, int z) const { return K + d * K + z; }
    int q_index(int d, int z) const { return K + J * K + d * K + z; }
};

inline MomentStack moment_stack(const Dataset& ds,
                                const std::function<double(double)>& kappa = {}) {
    MomentStack ms;
    ms.K = ds.K();
    ms.J = ds.J();
    const int dim = ms.K + 2 * ms.J * ms.K;
    ms.w = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd row(dim);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<Eigen::VectorXd> rows;
    rows.reserve(ds.rows.size());
    for (const auto& r : ds.rows) {
        row.setZero();
        row(ms.z_index(r.z)) = 1.0;
        row(ms.p_index(r.d, r.z)) = 1.0;
        row(ms.q_index(r.d, r.z)) = kappa ? kappa(r.y) : r.y;
        ms.w += row;
        rows.push_back(row);
    }
    ms.w /= static_cast<double>(ds.n());
    ms.sigma = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& v : rows) {
        Eigen::VectorXd c = v - ms.w;
        ms.sigma.noalias() += c * c.transpose();
    }
    ms.sigma /= static_cast<double>(ds.n());
    return ms;
}

}  // namespace vsiv

#endif  // VSIV_UNORDERED_HPP
