// test_dataset.cpp -- CSV ingestion, the empirical-measure tables, and the
// conditional-moment helper, with brute-force count oracles.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "test_util.hpp"
#include "vsiv/dataset.hpp"

using namespace vsiv;

namespace {

void write_d4_csv(const std::string& path) {
    std::ofstream out(path);
    out << "# provenance comment\n";
    out << "y,d,z\n";
    out << "1,1,z1\n2,0,z1\n1,1,z2\n3,1,z2\n";
}

}  // namespace

TEST_CASE("ingest_csv reads the worked example with inferred supports") {
    std::string path = "test_ds_d4.tmp.csv";
    write_d4_csv(path);
    Dataset ds = ingest_csv(path);
    std::remove(path.c_str());
    REQUIRE(ds.n() == 4);
    CHECK(ds.J() == 2);
    CHECK(ds.K() == 2);
    CHECK(ds.treatment_support == std::vector<double>{0.0, 1.0});
    CHECK(ds.instrument_labels == std::vector<std::string>{"z1", "z2"});
    CHECK(ds.rows[1].y == 2.0);
    CHECK(ds.rows[1].d == 0);
    CHECK(ds.rows[3].z == 1);
}

TEST_CASE("numeric instrument labels sort numerically, not lexically") {
    std::string path = "test_ds_numeric.tmp.csv";
    std::ofstream(path) << "y,d,z\n1,0,10\n2,1,2\n3,0,10\n4,1,2\n";
    Dataset ds = ingest_csv(path);
    std::remove(path.c_str());
    CHECK(ds.instrument_labels == std::vector<std::string>{"2", "10"});
}

TEST_CASE("ingest_csv reports row-level errors with line numbers") {
    std::string path = "test_ds_bad.tmp.csv";
    std::ofstream(path) << "y,d,z\n1,1,a\nbad,0,b\n";
    CHECK_THROWS_WITH(ingest_csv(path), Catch::Matchers::ContainsSubstring(":3"));
    std::remove(path.c_str());

    std::ofstream(path) << "y,q,z\n1,1,a\n";
    CHECK_THROWS_WITH(ingest_csv(path), Catch::Matchers::ContainsSubstring("'d'"));
    std::remove(path.c_str());
}

TEST_CASE("declared supports reject out-of-support rows") {
    std::string path = "test_ds_decl.tmp.csv";
    std::ofstream(path) << "y,d,z\n1,1,a\n2,0,c\n";
    CsvSchema schema;
    schema.instrument_labels = {"a", "b"};
    CHECK_THROWS_WITH(ingest_csv(path, schema), Catch::Matchers::ContainsSubstring("'c'"));
    std::remove(path.c_str());
}

TEST_CASE("group tables reproduce worked-example counts and t_n") {
    Dataset ds = testutil::d4();
    GroupTables t(ds);
    CHECK(t.grid() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(t.group_count(0) == 2);
    CHECK(t.group_count(1) == 2);
    CHECK(t.cell_count(0, 0) == 1);
    CHECK(t.cell_count(1, 1) == 2);
    CHECK(t.cell_outcome_sum(1, 1) == 4.0);
    CHECK(t.interval_count(1, 1, 1.0, 3.0) == 2);
    CHECK(t.interval_count(0, 0, 2.0, 2.0) == 1);
    CHECK(t.interval_mass(1, 0, 0.0, 10.0) == 0.25);
    CHECK(t.t_n() == 1.0);  // 4 * (2/4) * (2/4)
}

TEST_CASE("interval and half-open counts match brute force on random data") {
    Rng rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        Dataset ds = testutil::random_dataset(rng, 60, 3, 3);
        GroupTables t(ds);
        for (int q = 0; q < 50; ++q) {
            double a = static_cast<double>(rng.next_u64() % 9) - 1.0;
            double b = a + static_cast<double>(rng.next_u64() % 6);
            int d = static_cast<int>(rng.next_u64() % 3);
            int z = static_cast<int>(rng.next_u64() % 3);
            int closed = 0, halfopen = 0;
            for (const auto& r : ds.rows) {
                if (r.d != d || r.z != z) continue;
                if (r.y >= a && r.y <= b) ++closed;
                if (r.y > a && r.y <= b) ++halfopen;
            }
            REQUIRE(t.interval_count(d, z, a, b) == closed);
            REQUIRE(t.halfopen_count(d, z, a, b) == halfopen);
        }
        // Unbounded half-open cells cover the whole cell.
        double inf = std::numeric_limits<double>::infinity();
        for (int d = 0; d < 3; ++d)
            for (int z = 0; z < 3; ++z)
                REQUIRE(t.halfopen_count(d, z, -inf, inf) == t.cell_count(d, z));
    }
}

TEST_CASE("per-point masses partition the cell mass exactly") {
    Rng rng(7);
    Dataset ds = testutil::random_dataset(rng, 100, 2, 2);
    GroupTables t(ds);
    for (int d = 0; d < 2; ++d) {
        for (int z = 0; z < 2; ++z) {
            int total = 0;
            for (double v : t.grid()) total += t.interval_count(d, z, v, v);
            REQUIRE(total == t.cell_count(d, z));
        }
    }
}

TEST_CASE("cond_moment averages over the conditioning set, 0 when empty") {
    Dataset ds = testutil::d4();
    auto y = [](const Row& r) { return r.y; };
    CondMoment m = cond_moment(ds, y, {0});
    CHECK(m.value == 1.5);
    CHECK_FALSE(m.degenerate);
    m = cond_moment(ds, y, {0, 1});
    CHECK(m.value == 1.75);
    m = cond_moment(ds, y, {});
    CHECK(m.degenerate);
    CHECK(m.value == 0.0);
}

TEST_CASE("dataset validation catches malformed structures") {
    Dataset ds = testutil::d4();
    ds.rows[0].z = 5;
    CHECK_THROWS(ds.validate());
    ds = testutil::d4();
    ds.treatment_support = {1.0, 0.0};
    CHECK_THROWS(ds.validate());
    ds = testutil::d4();
    ds.rows.clear();
    CHECK_THROWS(ds.validate());
}
