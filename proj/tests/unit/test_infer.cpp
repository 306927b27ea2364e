// test_infer.cpp -- the two-part hypothesis test and chi-square quantiles.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "test_util.hpp"
#include "vsiv/estimate.hpp"
#include "vsiv/infer.hpp"

using namespace vsiv;

namespace {

LateEstimate make_estimate(Rng& rng, int n = 400) {
    Dataset ds = testutil::random_firststage(rng, n, 3);
    PairSet selected = PairSet::universe(3, PairOrientation::both_directions);
    return estimate_lates(ds, selected, GFunction{});
}

}  // namespace

TEST_CASE("chi-square quantiles match reference values") {
    CHECK(chi2_quantile(1, 0.05) == Catch::Approx(3.8414588206941245).margin(1e-9));
    CHECK(chi2_quantile(2, 0.05) == Catch::Approx(5.991464547107979).margin(1e-9));
    CHECK(chi2_quantile(1, 0.01) == Catch::Approx(6.6348966010212145).margin(1e-9));
    CHECK_THROWS(chi2_quantile(0, 0.05));
    CHECK_THROWS(chi2_quantile(1, 0.0));
    CHECK_THROWS(chi2_quantile(1, 1.0));
}

TEST_CASE("quadratic part is nonnegative and scale invariant") {
    Rng rng(300);
    LateEstimate est = make_estimate(rng);
    Hypothesis hyp;
    hyp.pairs = {{0, 1}, {0, 2}};
    hyp.A.resize(1, 2);
    hyp.A << 1.0, -1.0;
    hyp.rhs.resize(1);
    hyp.rhs << 0.0;
    TestResult r = wald_test(est, hyp, 0.05);
    CHECK(r.ts1 == 1);
    CHECK(r.ts2 >= 0.0);
    CHECK(r.df == 1);
    CHECK(r.critical == Catch::Approx(chi2_quantile(1, 0.05)).margin(1e-12));

    Hypothesis scaled = hyp;
    scaled.A *= 2.0;
    scaled.rhs *= 2.0;
    TestResult rs = wald_test(est, scaled, 0.05);
    CHECK(rs.ts2 == Catch::Approx(r.ts2).epsilon(1e-10));
    CHECK(rs.reject == r.reject);
}

TEST_CASE("a true restriction built from the estimate itself gives ts2 = 0") {
    Rng rng(301);
    LateEstimate est = make_estimate(rng);
    int i = est.universe.index_of({1, 2});
    Hypothesis hyp;
    hyp.pairs = {{1, 2}};
    hyp.A.resize(1, 1);
    hyp.A << 1.0;
    hyp.rhs.resize(1);
    hyp.rhs << est.beta[i];
    TestResult r = wald_test(est, hyp, 0.05);
    CHECK(r.ts2 == Catch::Approx(0.0).margin(1e-12));
    CHECK_FALSE(r.reject);
}

TEST_CASE("an unselected pair forces rejection through the selection part") {
    Rng rng(302);
    Dataset ds = testutil::random_firststage(rng, 400, 3);
    PairSet selected(PairOrientation::both_directions);
    selected.add({0, 1});  // (0, 2) stays unselected
    LateEstimate est = estimate_lates(ds, selected, GFunction{});
    Hypothesis hyp;
    hyp.pairs = {{0, 2}};
    hyp.A.resize(1, 1);
    hyp.A << 1.0;
    hyp.rhs.resize(1);
    hyp.rhs << 0.0;
    TestResult r = wald_test(est, hyp, 0.05);
    CHECK(r.ts1 == 0);
    CHECK(r.reject);
}

TEST_CASE("nonlinear evaluators agree with the affine specification") {
    Rng rng(303);
    LateEstimate est = make_estimate(rng);
    Hypothesis lin;
    lin.pairs = {{0, 1}, {1, 2}};
    lin.A.resize(1, 2);
    lin.A << 1.0, -1.0;
    lin.rhs.resize(1);
    lin.rhs << 0.25;

    Hypothesis nl;
    nl.pairs = lin.pairs;
    nl.value = [](const Eigen::VectorXd& b) {
        Eigen::VectorXd v(1);
        v << b(0) - b(1) - 0.25;
        return v;
    };
    nl.jacobian = [](const Eigen::VectorXd&) {
        Eigen::MatrixXd j(1, 2);
        j << 1.0, -1.0;
        return j;
    };
    TestResult a = wald_test(est, lin, 0.05);
    TestResult b = wald_test(est, nl, 0.05);
    CHECK(b.ts2 == Catch::Approx(a.ts2).epsilon(1e-12));
    CHECK(b.reject == a.reject);
}

TEST_CASE("malformed hypotheses are rejected up front") {
    Rng rng(304);
    LateEstimate est = make_estimate(rng);
    Hypothesis hyp;
    CHECK_THROWS(wald_test(est, hyp, 0.05));  // no pairs

    hyp.pairs = {{0, 1}};
    hyp.A.resize(1, 2);  // wrong column count
    hyp.A << 1.0, 0.0;
    hyp.rhs.resize(1);
    hyp.rhs << 0.0;
    CHECK_THROWS(wald_test(est, hyp, 0.05));

    Hypothesis rank_def;
    rank_def.pairs = {{0, 1}, {0, 2}};
    rank_def.A.resize(2, 2);
    rank_def.A << 1.0, -1.0, 2.0, -2.0;  // rank 1
    rank_def.rhs.resize(2);
    rank_def.rhs << 0.0, 0.0;
    CHECK_THROWS(wald_test(est, rank_def, 0.05));

    Hypothesis outside;
    outside.pairs = {{0, 5}};
    outside.A.resize(1, 1);
    outside.A << 1.0;
    outside.rhs.resize(1);
    outside.rhs << 0.0;
    CHECK_THROWS(wald_test(est, outside, 0.05));

    Hypothesis ok;
    ok.pairs = {{0, 1}};
    ok.A.resize(1, 1);
    ok.A << 1.0;
    ok.rhs.resize(1);
    ok.rhs << 0.0;
    CHECK_THROWS(wald_test(est, ok, 0.0));
}
