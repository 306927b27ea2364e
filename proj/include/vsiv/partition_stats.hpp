// partition_stats.hpp -- partition-based density falsification conditions for
// multivalued treatments, and the corresponding pair-set estimator.
//
// For a pair (k, k') with instrument arms g in {1_{z_k}, 1_{z_k'}} and
// psi(h, d, g) = Phat(Y in h, D = d, Z in g)/Phat(Z in g), three statistics
// are formed from a prespecified finite collection of partitions of the real
// line into half-open cells (a, b]:
//   psi1 = max over partitions P, arms d of  sum_{cells h of P} max_g psi - 1
//   psi2 = 1 - min over J-tuples (P^1..P^J) of
//              sum_{h_1 in P^1} ... sum_{h_J in P^J} min_g sum_j psi(h_j, d_j, g)
//   psi3 = max over tuples, over j, over intervals A_j with realized-grid
//          endpoints of  { max_g psi(A_j, d_j, g) - phi_tilde_j }, where
//          phi_tilde_j sums min_g [psi(A_j, d_j, g) + sum_{xi != j} psi(h_xi,
//          d_xi, g)] over the other-index cell tuples.
// Under pairwise validity all three are <= 0 in population; a pair is kept in
// the estimated set when sqrt(T_n) * psi_l <= t_n for l = 1, 2, 3.
//
// Binary treatments bypass these conditions entirely (they are implied by the
// interval-sup conditions in that case).

#ifndef VSIV_PARTITION_STATS_HPP
#define VSIV_PARTITION_STATS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vsiv/dataset.hpp"
#include "vsiv/pairs.hpp"

namespace vsiv {

// A partition of the real line given by sorted distinct cut points c_1 < ...
// < c_m: cells (-inf, c_1], (c_1, c_2], ..., (c_m, +inf).
struct Partition {
    std::vector<double> cuts;

    struct Cell {
        double lo, hi;  // the half-open interval (lo, hi]
    };
    std::vector<Cell> cells() const {
        std::vector<Cell> out;
        double lo = -std::numeric_limits<double>::infinity();
        for (double c : cuts) {
            out.push_back({lo, c});
            lo = c;
        }
        out.push_back({lo, std::numeric_limits<double>::infinity()});
        return out;
    }
};

struct PartitionCollection {
    std::vector<Partition> parts;

    // Default collection: for each Q in {2, 3, 5}, cut points at the i/Q
    // empirical outcome quantiles (duplicates dropped).
    static PartitionCollection quantile_default(const Dataset& ds,
                                                std::vector<int> qs = {2, 3, 5}) {
        std::vector<double> y;
        y.reserve(ds.rows.size());
        for (const auto& r : ds.rows) y.push_back(r.y);
        std::sort(y.begin(), y.end());
        PartitionCollection pc;
        for (int q : qs) {
            Partition p;
            for (int i = 1; i < q; ++i) {
                std::size_t pos = static_cast<std::size_t>(
                    std::ceil(static_cast<double>(i) * y.size() / q));
                if (pos > 0) --pos;
                p.cuts.push_back(y[pos]);
            }
            std::sort(p.cuts.begin(), p.cuts.end());
            p.cuts.erase(std::unique(p.cuts.begin(), p.cuts.end()), p.cuts.end());
            if (!p.cuts.empty()) pc.parts.push_back(std::move(p));
        }
        if (pc.parts.empty()) pc.parts.push_back(Partition{});  // the trivial {R}
        return pc;
    }
};

struct PsiReport {
    PairId pair;
    double psi1 = 0.0, psi2 = 0.0, psi3 = 0.0;
    double comparand = 0.0;  // sqrt(T_n) * max(psi1, psi2, psi3)
    double t_n = 0.0;
    bool degenerate = false;
};

// psi_hat(h, d, z) = Phat(Y in (lo, hi], D = d, Z = z)/Phat(Z = z); empty
// groups give 0 by convention.
inline double psi_hat(const GroupTables& t, double lo, double hi, int d, int z) {
    int nz = t.group_count(z);
    if (nz == 0) return 0.0;
    return static_cast<double>(t.halfopen_count(d, z, lo, hi)) / nz;
}

inline PsiReport psi_bounds(const GroupTables& t, const PairId& pair,
                            const PartitionCollection& pc,
                            std::size_t tuple_cap = 100000) {
    const int J = t.J();
    const int P = static_cast<int>(pc.parts.size());
    if (P < 1) throw std::invalid_argument("empty partition collection");
    double ntuples = std::pow(static_cast<double>(P), J);
    if (ntuples > static_cast<double>(tuple_cap))
        throw std::invalid_argument("partition tuple count exceeds the configured cap");

    PsiReport rep;
    rep.pair = pair;
    const int g1 = pair.k, g2 = pair.kprime;
    rep.degenerate = t.group_count(g1) == 0 || t.group_count(g2) == 0;
    {
        double lam = 1.0;
        for (int k = 0; k < t.K(); ++k)
            lam *= static_cast<double>(t.group_count(k)) / t.n();
        rep.t_n = t.n() * lam;
    }

    // Per-partition cell lists and psi tables: psis[p][d][c][g].
    std::vector<std::vector<Partition::Cell>> cells(P);
    for (int p = 0; p < P; ++p) cells[p] = pc.parts[p].cells();
    std::vector<std::vector<std::vector<std::array<double, 2>>>> psis(P);
    for (int p = 0; p < P; ++p) {
        psis[p].assign(J, {});
        for (int d = 0; d < J; ++d) {
            psis[p][d].resize(cells[p].size());
            for (std::size_t c = 0; c < cells[p].size(); ++c) {
                psis[p][d][c] = {psi_hat(t, cells[p][c].lo, cells[p][c].hi, d, g1),
                                 psi_hat(t, cells[p][c].lo, cells[p][c].hi, d, g2)};
            }
        }
    }

    // psi1: one partition, one arm at a time.
    rep.psi1 = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < P; ++p) {
        for (int d = 0; d < J; ++d) {
            double sum = 0.0;
            for (std::size_t c = 0; c < cells[p].size(); ++c)
                sum += std::max(psis[p][d][c][0], psis[p][d][c][1]);
            rep.psi1 = std::max(rep.psi1, sum - 1.0);
        }
    }

    // Realized-grid interval endpoints for psi3: (a, b] with a < b drawn from
    // {-inf} + outcome grid + {+inf}.
    std::vector<double> ep;
    ep.push_back(-std::numeric_limits<double>::infinity());
    for (double v : t.grid()) ep.push_back(v);
    ep.push_back(std::numeric_limits<double>::infinity());

    rep.psi2 = -std::numeric_limits<double>::infinity();
    rep.psi3 = -std::numeric_limits<double>::infinity();
    double best_total = std::numeric_limits<double>::infinity();  // for psi2

    // Enumerate partition tuples (P^1, ..., P^J).
    std::vector<int> tup(J, 0);
    while (true) {
        // psi2 inner total: sum over cell tuples of min_g of the per-g sums.
        {
            std::vector<std::size_t> ct(J, 0);
            double total = 0.0;
            while (true) {
                double s1 = 0.0, s2 = 0.0;
                for (int j = 0; j < J; ++j) {
                    s1 += psis[tup[j]][j][ct[j]][0];
                    s2 += psis[tup[j]][j][ct[j]][1];
                }
                total += std::min(s1, s2);
                int j = 0;
                for (; j < J; ++j) {
                    if (++ct[j] < cells[tup[j]].size()) break;
                    ct[j] = 0;
                }
                if (j == J) break;
            }
            best_total = std::min(best_total, total);
        }

        // psi3: free index j, partial sums over the other indices.
        for (int j = 0; j < J; ++j) {
            std::vector<std::array<double, 2>> others;  // (S1, S2) per cell tuple
            {
                std::vector<std::size_t> ct(J, 0);
                while (true) {
                    double s1 = 0.0, s2 = 0.0;
                    for (int x = 0; x < J; ++x) {
                        if (x == j) continue;
                        s1 += psis[tup[x]][x][ct[x]][0];
                        s2 += psis[tup[x]][x][ct[x]][1];
                    }
                    others.push_back({s1, s2});
                    int x = 0;
                    for (; x < J; ++x) {
                        if (x == j) continue;
                        if (++ct[x] < cells[tup[x]].size()) break;
                        ct[x] = 0;
                    }
                    if (x >= J) break;
                }
            }
            for (std::size_t a = 0; a + 1 < ep.size(); ++a) {
                for (std::size_t b = a + 1; b < ep.size(); ++b) {
                    double q1 = psi_hat(t, ep[a], ep[b], j, g1);
                    double q2 = psi_hat(t, ep[a], ep[b], j, g2);
                    double phi_tilde = 0.0;
                    for (const auto& s : others)
                        phi_tilde += std::min(q1 + s[0], q2 + s[1]);
                    rep.psi3 = std::max(rep.psi3, std::max(q1, q2) - phi_tilde);
                }
            }
        }

        int p = 0;
        for (; p < J; ++p) {
            if (++tup[p] < P) break;
            tup[p] = 0;
        }
        if (p == J) break;
    }
    rep.psi2 = 1.0 - best_total;

    double worst = std::max(rep.psi1, std::max(rep.psi2, rep.psi3));
    rep.comparand = std::sqrt(rep.t_n) * worst;
    return rep;
}

// Z2 estimator: pairs whose sqrt(T_n)-scaled psi statistics all stay at or
// below t_n.  Binary treatments bypass the conditions (all pairs retained).
inline PairSet z2_hat(const GroupTables& t, const PairSet& pairs,
                      const PartitionCollection& pc, double t_n,
                      std::size_t tuple_cap = 100000) {
    if (t_n <= 0.0) throw std::invalid_argument("t_n must be positive");
    if (t.J() == 2) return pairs;
    PairSet out(pairs.orientation());
    for (const auto& p : pairs.pairs()) {
        PsiReport rep = psi_bounds(t, p, pc, tuple_cap);
        double root = std::sqrt(rep.t_n);
        if (root * rep.psi1 <= t_n && root * rep.psi2 <= t_n && root * rep.psi3 <= t_n)
            out.add(p);
    }
    return out;
}

}  // namespace vsiv

#endif  // VSIV_PARTITION_STATS_HPP
