// pairs.hpp -- instrument-value pairs and pair sets.
//
// A PairId is an ordered pair (k, kprime) of instrument indices.  For binary
// and ordered treatments the pair universe contains both orientations of each
// two-element subset (K*(K-1) pairs); for unordered treatments only the
// upper-triangle orientation k < kprime is used (K*(K-1)/2 pairs).

#ifndef VSIV_PAIRS_HPP
#define VSIV_PAIRS_HPP

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vsiv {

struct PairId {
    int k = 0;       // first instrument index
    int kprime = 0;  // second instrument index, != k

    friend bool operator==(const PairId& a, const PairId& b) {
        return a.k == b.k && a.kprime == b.kprime;
    }
    friend bool operator<(const PairId& a, const PairId& b) {
        if (a.k != b.k) return a.k < b.k;
        return a.kprime < b.kprime;
    }
};

enum class PairOrientation {
    both_directions,  // K*(K-1) ordered pairs
    upper_triangle,   // K*(K-1)/2 pairs with k < kprime
};

// An ordered, duplicate-free collection of pairs.
class PairSet {
public:
    PairSet() = default;
    explicit PairSet(PairOrientation o) : orientation_(o) {}

    // The full pair universe over K instrument values, in the canonical vector
    // ordering (1,2)...(1,K),(2,1),...,(K,K-1) (upper triangle keeps k < kprime).
    static PairSet universe(int K, PairOrientation o) {
        PairSet s(o);
        for (int k = 0; k < K; ++k)
            for (int kp = 0; kp < K; ++kp) {
                if (kp == k) continue;
                if (o == PairOrientation::upper_triangle && kp < k) continue;
                s.pairs_.push_back({k, kp});
            }
        return s;
    }

    void add(PairId p) {
        if (p.k == p.kprime) throw std::invalid_argument("pair must have distinct indices");
        if (orientation_ == PairOrientation::upper_triangle && p.kprime < p.k)
            std::swap(p.k, p.kprime);
        if (!contains(p)) pairs_.push_back(p);
    }

    bool contains(const PairId& p) const {
        return std::find(pairs_.begin(), pairs_.end(), p) != pairs_.end();
    }

    PairSet intersect(const PairSet& other) const {
        PairSet out(orientation_);
        for (const auto& p : pairs_)
            if (other.contains(p)) out.pairs_.push_back(p);
        return out;
    }

    // Ref-qualified so that iterating pairs() of a temporary (for example a
    // freshly built universe) cannot dangle.
    const std::vector<PairId>& pairs() const& { return pairs_; }
    std::vector<PairId> pairs() && { return std::move(pairs_); }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    PairOrientation orientation() const { return orientation_; }

    // Position of a pair in the canonical universe ordering, or -1.
    int index_of(const PairId& p) const {
        for (std::size_t i = 0; i < pairs_.size(); ++i)
            if (pairs_[i] == p) return static_cast<int>(i);
        return -1;
    }

private:
    PairOrientation orientation_ = PairOrientation::both_directions;
    std::vector<PairId> pairs_;
};

}  // namespace vsiv

#endif  // VSIV_PAIRS_HPP
