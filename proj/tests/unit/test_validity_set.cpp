// test_validity_set.cpp -- assembling the estimated validity pair set:
// worked-example thresholds, monotonicity, degenerate exclusion, and the
// subinstrument enumeration.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"
#include "vsiv/validity_set.hpp"

using namespace vsiv;

TEST_CASE("worked example: both pairs at tau=4, one pair at tau=1") {
    Dataset ds = testutil::d4();
    Z0Config cfg;
    ValiditySetEstimate wide = estimate_z0(ds, 4.0, cfg);
    REQUIRE(wide.per_pair.size() == 2);
    CHECK(wide.selected.contains({0, 1}));
    CHECK(wide.selected.contains({1, 0}));
    CHECK(wide.per_pair[0].statistic == 0.0);
    CHECK(wide.per_pair[1].statistic == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    CHECK_FALSE(wide.km_used);

    ValiditySetEstimate narrow = estimate_z0(ds, 1.0, cfg);
    CHECK(narrow.selected.contains({0, 1}));
    CHECK_FALSE(narrow.selected.contains({1, 0}));
}

TEST_CASE("selection is monotone in tau") {
    Rng rng(101);
    for (int rep = 0; rep < 10; ++rep) {
        Dataset ds = testutil::random_dataset(rng, 80, 3, 2);
        Z0Config cfg;
        ValiditySetEstimate lo = estimate_z0(ds, 0.5, cfg);
        ValiditySetEstimate mid = estimate_z0(ds, 2.0, cfg);
        ValiditySetEstimate hi = estimate_z0(ds, 8.0, cfg);
        for (const auto& p : lo.selected.pairs()) REQUIRE(mid.selected.contains(p));
        for (const auto& p : mid.selected.pairs()) REQUIRE(hi.selected.contains(p));
    }
}

TEST_CASE("degenerate pairs are excluded and flagged") {
    Dataset ds = testutil::d4();
    ds.instrument_labels.push_back("z3");  // declared, never observed
    Z0Config cfg;
    ValiditySetEstimate est = estimate_z0(ds, 4.0, cfg);
    for (const auto& rec : est.per_pair) {
        bool touches_unobserved = rec.pair.k == 2 || rec.pair.kprime == 2;
        REQUIRE(rec.degenerate == touches_unobserved);
        if (touches_unobserved) REQUIRE_FALSE(rec.included);
    }
    CHECK_FALSE(est.selected.contains({0, 2}));
}

TEST_CASE("multivalued treatments intersect the partition screen") {
    Rng rng(102);
    Dataset ds = testutil::random_dataset(rng, 60, 2, 3);
    Z0Config cfg;
    cfg.sup.mode = TreatmentMode::ordered;
    ValiditySetEstimate est = estimate_z0(ds, 6.0, cfg);
    CHECK(est.km_used);
    for (const auto& rec : est.per_pair)
        if (rec.included) REQUIRE(rec.psi_pass);
}

TEST_CASE("unordered mode screens the upper triangle only") {
    Rng rng(103);
    Dataset ds = testutil::random_dataset(rng, 60, 3, 3);
    ds.ordered_treatment = false;
    Z0Config cfg;
    cfg.sup.mode = TreatmentMode::unordered;
    ValiditySetEstimate est = estimate_z0(ds, 6.0, cfg);
    REQUIRE(est.per_pair.size() == 3);
    for (const auto& rec : est.per_pair) REQUIRE(rec.pair.k < rec.pair.kprime);
}

TEST_CASE("intersect_presumed keeps only presumed pairs") {
    Dataset ds = testutil::d4();
    Z0Config cfg;
    ValiditySetEstimate est = estimate_z0(ds, 4.0, cfg);
    PairSet presumed(PairOrientation::both_directions);
    presumed.add({1, 0});
    PairSet out = intersect_presumed(est, presumed);
    REQUIRE(out.size() == 1);
    CHECK(out.pairs()[0] == PairId{1, 0});
}

TEST_CASE("tau must be positive") {
    Dataset ds = testutil::d4();
    Z0Config cfg;
    CHECK_THROWS(estimate_z0(ds, 0.0, cfg));
}

TEST_CASE("subinstrument enumeration builds every non-empty component subset") {
    Dataset ds = testutil::d4();
    std::vector<std::vector<std::string>> comps = {
        {"a", "a", "b", "b"},
        {"x", "y", "x", "y"},
    };
    Z0Config cfg;
    auto results = enumerate_subinstruments(ds, comps, 4.0, cfg);
    REQUIRE(results.size() == 3);  // masks 01, 10, 11
    CHECK(results[0].value_labels == std::vector<std::string>{"a", "b"});
    CHECK(results[1].value_labels == std::vector<std::string>{"x", "y"});
    REQUIRE(results[2].value_labels.size() == 4);
    CHECK(results[2].value_labels[0] == "a|x");
    // The single-component screens have two pairs each; the joint one has 12.
    CHECK(results[0].estimate.per_pair.size() == 2);
    CHECK(results[2].estimate.per_pair.size() == 12);

    std::vector<std::vector<std::string>> too_many(9, comps[0]);
    CHECK_THROWS(enumerate_subinstruments(ds, too_many, 4.0, cfg));
    std::vector<std::vector<std::string>> wrong_len = {{"a", "b"}};
    CHECK_THROWS(enumerate_subinstruments(ds, wrong_len, 4.0, cfg));
}
