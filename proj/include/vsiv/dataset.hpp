// dataset.hpp -- immutable data model and the empirical-measure engine.
//
// A Dataset holds rows (y, d, z) where d and z are dense indices into the
// declared treatment/instrument supports.  GroupTables materializes, per
// (d, z) cell, counts aligned to the sorted distinct-outcome grid together
// with prefix sums, so that the probability mass of any outcome interval in
// any cell is an O(log m) query.  All probabilities are integer counts
// divided by n exactly once, which keeps small-sample oracles exact.
//
// Both structures are immutable after construction; queries are pure and
// safe for concurrent use.

#ifndef VSIV_DATASET_HPP
#define VSIV_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vsiv/csv.hpp"
#include "vsiv/pairs.hpp"

namespace vsiv {

struct Row {
    double y;  // outcome
    int d;     // treatment index, 0..J-1
    int z;     // instrument index, 0..K-1
};

struct Dataset {
    std::vector<Row> rows;
    // Ordered treatments: strictly increasing real labels d_1 < ... < d_J.
    // Unordered treatments: labels kept in first-appearance order.
    std::vector<double> treatment_support;
    std::vector<std::string> instrument_labels;
    bool ordered_treatment = true;

    int n() const { return static_cast<int>(rows.size()); }
    int J() const { return static_cast<int>(treatment_support.size()); }
    int K() const { return static_cast<int>(instrument_labels.size()); }

    void validate() const {
        if (rows.empty()) throw std::invalid_argument("dataset has no rows");
        if (J() < 2) throw std::invalid_argument("treatment support needs at least 2 values");
        if (K() < 2) throw std::invalid_argument("instrument support needs at least 2 values");
        if (ordered_treatment)
            for (int j = 1; j < J(); ++j)
                if (!(treatment_support[j - 1] < treatment_support[j]))
                    throw std::invalid_argument("ordered treatment support must be strictly increasing");
        for (const auto& r : rows)
            if (r.d < 0 || r.d >= J() || r.z < 0 || r.z >= K())
                throw std::invalid_argument("row indexes outside declared supports");
    }
};

// Column-name mapping for CSV ingestion.
struct CsvSchema {
    std::string y_column = "y";
    std::string d_column = "d";
    std::string z_column = "z";
    // Optional explicit supports; inferred from the data when empty.
    std::vector<double> treatment_support;
    std::vector<std::string> instrument_labels;
    bool ordered_treatment = true;
};

// Reads a CSV file into a Dataset.  Supports are inferred as sorted distinct
// values unless declared in the schema, in which case unseen labels are a
// row-level error.  Row order is preserved.
inline Dataset ingest_csv(const std::string& path, const CsvSchema& schema = {}) {
    csv::Table t = csv::read_file(path);
    int yc = t.column(schema.y_column);
    int dc = t.column(schema.d_column);
    int zc = t.column(schema.z_column);
    if (yc < 0) throw std::runtime_error("missing column '" + schema.y_column + "' in " + path);
    if (dc < 0) throw std::runtime_error("missing column '" + schema.d_column + "' in " + path);
    if (zc < 0) throw std::runtime_error("missing column '" + schema.z_column + "' in " + path);
    if (t.rows.empty()) throw std::runtime_error("no data rows in " + path);

    struct RawRow {
        double y;
        double d;
        std::string z;
    };
    std::vector<RawRow> raw;
    raw.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& fields = t.rows[i];
        std::size_t line = i + 2;  // 1-based, after the header line
        std::size_t need = static_cast<std::size_t>(std::max({yc, dc, zc})) + 1;
        if (fields.size() < need)
            throw std::runtime_error(path + ":" + std::to_string(line) + ": missing fields");
        auto y = csv::parse_double(fields[yc]);
        auto d = csv::parse_double(fields[dc]);
        if (!y) throw std::runtime_error(path + ":" + std::to_string(line) +
                                         ": unparseable outcome '" + fields[yc] + "'");
        if (!d) throw std::runtime_error(path + ":" + std::to_string(line) +
                                         ": unparseable treatment '" + fields[dc] + "'");
        if (fields[zc].empty())
            throw std::runtime_error(path + ":" + std::to_string(line) + ": empty instrument label");
        raw.push_back({*y, *d, fields[zc]});
    }

    Dataset ds;
    ds.ordered_treatment = schema.ordered_treatment;

    // Treatment support: declared, or sorted distinct observed values.
    if (!schema.treatment_support.empty()) {
        ds.treatment_support = schema.treatment_support;
    } else {
        std::vector<double> vals;
        for (const auto& r : raw) vals.push_back(r.d);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        ds.treatment_support = vals;
    }
    std::map<double, int> dindex;
    for (int j = 0; j < static_cast<int>(ds.treatment_support.size()); ++j)
        dindex[ds.treatment_support[j]] = j;

    // Instrument labels: declared, or distinct observed labels sorted
    // numerically when all labels parse as numbers, lexicographically otherwise.
    if (!schema.instrument_labels.empty()) {
        ds.instrument_labels = schema.instrument_labels;
    } else {
        std::vector<std::string> labels;
        for (const auto& r : raw)
            if (std::find(labels.begin(), labels.end(), r.z) == labels.end())
                labels.push_back(r.z);
        bool all_numeric = true;
        for (const auto& s : labels)
            if (!csv::parse_double(s)) { all_numeric = false; break; }
        std::sort(labels.begin(), labels.end(), [&](const std::string& a, const std::string& b) {
            if (all_numeric) return *csv::parse_double(a) < *csv::parse_double(b);
            return a < b;
        });
        ds.instrument_labels = labels;
    }
    std::map<std::string, int> zindex;
    for (int k = 0; k < static_cast<int>(ds.instrument_labels.size()); ++k)
        zindex[ds.instrument_labels[k]] = k;

    ds.rows.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto dit = dindex.find(raw[i].d);
        if (dit == dindex.end())
            throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                     ": treatment value " + std::to_string(raw[i].d) +
                                     " not in declared support");
        auto zit = zindex.find(raw[i].z);
        if (zit == zindex.end())
            throw std::runtime_error(path + ":" + std::to_string(i + 2) +
                                     ": instrument label '" + raw[i].z + "' not in declared support");
        ds.rows.push_back({raw[i].y, dit->second, zit->second});
    }
    ds.validate();
    return ds;
}

// Per-cell outcome counts on the pooled distinct-outcome grid, with prefix
// sums for interval-mass queries.
class GroupTables {
public:
    explicit GroupTables(const Dataset& ds)
        : n_(ds.n()), J_(ds.J()), K_(ds.K()) {
        ds.validate();
        grid_.reserve(ds.rows.size());
        for (const auto& r : ds.rows) grid_.push_back(r.y);
        std::sort(grid_.begin(), grid_.end());
        grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
        int m = static_cast<int>(grid_.size());

        count_.assign(static_cast<std::size_t>(J_) * K_, std::vector<int>(m, 0));
        nz_.assign(K_, 0);
        ndz_.assign(static_cast<std::size_t>(J_) * K_, 0);
        ysum_dz_.assign(static_cast<std::size_t>(J_) * K_, 0.0);
        for (const auto& r : ds.rows) {
            int gi = grid_index(r.y);
            count_[cell(r.d, r.z)][gi] += 1;
            nz_[r.z] += 1;
            ndz_[cell(r.d, r.z)] += 1;
            ysum_dz_[cell(r.d, r.z)] += r.y;
        }
        cum_.assign(static_cast<std::size_t>(J_) * K_, std::vector<int>(m, 0));
        for (int c = 0; c < J_ * K_; ++c) {
            int acc = 0;
            for (int j = 0; j < m; ++j) {
                acc += count_[c][j];
                cum_[c][j] = acc;
            }
        }
    }

    int n() const { return n_; }
    int J() const { return J_; }
    int K() const { return K_; }
    const std::vector<double>& grid() const { return grid_; }

    // Count of rows in cell (d, z).
    int cell_count(int d, int z) const { return ndz_[cell(d, z)]; }
    // Count of rows with instrument value z.
    int group_count(int z) const { return nz_[z]; }
    // Sum of outcomes in cell (d, z).
    double cell_outcome_sum(int d, int z) const { return ysum_dz_[cell(d, z)]; }

    // Per-grid-point count in cell (d, z).
    const std::vector<int>& point_counts(int d, int z) const { return count_[cell(d, z)]; }

    // Count of rows with y <= grid()[j] in cell (d, z).
    int cum_count(int d, int z, int j) const { return j < 0 ? 0 : cum_[cell(d, z)][j]; }

    // Number of rows with y in the closed interval [a, b], D = d, Z = z.
    int interval_count(int d, int z, double a, double b) const {
        if (a > b) throw std::invalid_argument("interval_count requires a <= b");
        return cum_count(d, z, index_le(b)) - cum_count(d, z, index_lt(a));
    }

    // Number of rows with y in the half-open interval (a, b], D = d, Z = z.
    // Infinite bounds give unbounded cells.
    int halfopen_count(int d, int z, double a, double b) const {
        int hi = std::isinf(b) && b > 0 ? static_cast<int>(grid_.size()) - 1 : index_le(b);
        int lo = std::isinf(a) && a < 0 ? -1 : index_le(a);
        return cum_count(d, z, hi) - cum_count(d, z, lo);
    }

    // Empirical mass of {Y in [a, b], D = d, Z = z}.
    double interval_mass(int d, int z, double a, double b) const {
        return static_cast<double>(interval_count(d, z, a, b)) / n_;
    }

    // Index of the largest grid point <= x, or -1.
    int index_le(double x) const {
        auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        return static_cast<int>(it - grid_.begin()) - 1;
    }
    // Index of the largest grid point < x, or -1.
    int index_lt(double x) const {
        auto it = std::lower_bound(grid_.begin(), grid_.end(), x);
        return static_cast<int>(it - grid_.begin()) - 1;
    }
    // Index of x in the grid; throws if x is not a grid point.
    int grid_index(double y) const {
        auto it = std::lower_bound(grid_.begin(), grid_.end(), y);
        if (it == grid_.end() || *it != y) throw std::logic_error("value not on outcome grid");
        return static_cast<int>(it - grid_.begin());
    }

    // n * prod_k Phat(Z = z_k): the scaling factor of the falsification
    // statistics.  Returns 0 when some instrument value is unobserved.
    double t_n() const {
        double prod = 1.0;
        for (int k = 0; k < K_; ++k) prod *= static_cast<double>(nz_[k]) / n_;
        return n_ * prod;
    }

private:
    int cell(int d, int z) const { return d * K_ + z; }

    int n_, J_, K_;
    std::vector<double> grid_;
    std::vector<std::vector<int>> count_;  // per cell, per grid point
    std::vector<std::vector<int>> cum_;    // per cell, prefix sums
    std::vector<int> nz_;
    std::vector<int> ndz_;
    std::vector<double> ysum_dz_;
};

// Result of a conditional-moment query; degenerate means the conditioning
// subsample was empty and the value is 0 by convention.
struct CondMoment {
    double value = 0.0;
    bool degenerate = false;
};

// Subsample mean of xi(row) given Z in zset: mean(xi * 1{Z in zset}) divided
// by mean(1{Z in zset}), 0 with a flag when the subsample is empty.
inline CondMoment cond_moment(const Dataset& ds, const std::function<double(const Row&)>& xi,
                              const std::vector<int>& zset) {
    double sum = 0.0;
    long count = 0;
    for (const auto& r : ds.rows) {
        if (std::find(zset.begin(), zset.end(), r.z) == zset.end()) continue;
        sum += xi(r);
        ++count;
    }
    if (count == 0) return {0.0, true};
    return {sum / count, false};
}

}  // namespace vsiv

#endif  // VSIV_DATASET_HPP
