// test_csv_pairs.cpp -- CSV helpers and pair-set containers.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "vsiv/csv.hpp"
#include "vsiv/pairs.hpp"

using namespace vsiv;

TEST_CASE("split_line handles plain, quoted, and CRLF input") {
    CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(csv::split_line("a,,c") == std::vector<std::string>{"a", "", "c"});
    CHECK(csv::split_line("\"a,b\",c") == std::vector<std::string>{"a,b", "c"});
    CHECK(csv::split_line("\"he said \"\"hi\"\"\",x") ==
          std::vector<std::string>{"he said \"hi\"", "x"});
    CHECK(csv::split_line("a,b\r") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("parse_double is strict") {
    CHECK(csv::parse_double("1.5").value() == 1.5);
    CHECK(csv::parse_double("-2e3").value() == -2000.0);
    CHECK_FALSE(csv::parse_double("").has_value());
    CHECK_FALSE(csv::parse_double("1.5x").has_value());
    CHECK_FALSE(csv::parse_double("abc").has_value());
}

TEST_CASE("read_file skips comment lines and round-trips the writer") {
    std::string path = "test_csv_roundtrip.tmp.csv";
    {
        csv::Writer w(path);
        w.comment("provenance line");
        w.row({"x", "y"});
        w.row({"1", "2"});
        w.row({"3", "4"});
    }
    csv::Table t = csv::read_file(path);
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1] == std::vector<std::string>{"3", "4"});
    CHECK(t.column("y") == 1);
    CHECK(t.column("nope") == -1);
    std::remove(path.c_str());
}

TEST_CASE("read_file rejects missing and empty files") {
    CHECK_THROWS(csv::read_file("no_such_file.csv"));
    std::string path = "test_csv_empty.tmp.csv";
    std::ofstream(path) << "# only a comment\n";
    CHECK_THROWS(csv::read_file(path));
    std::remove(path.c_str());
}

TEST_CASE("pair universe has the canonical ordering and sizes") {
    PairSet both = PairSet::universe(3, PairOrientation::both_directions);
    REQUIRE(both.size() == 6);
    CHECK(both.pairs()[0] == PairId{0, 1});
    CHECK(both.pairs()[1] == PairId{0, 2});
    CHECK(both.pairs()[2] == PairId{1, 0});
    CHECK(both.pairs()[5] == PairId{2, 1});
    CHECK(both.index_of({1, 2}) == 3);
    CHECK(both.index_of({3, 0}) == -1);

    PairSet upper = PairSet::universe(4, PairOrientation::upper_triangle);
    REQUIRE(upper.size() == 6);
    for (const auto& p : upper.pairs()) CHECK(p.k < p.kprime);
}

TEST_CASE("pair set add/contains/intersect respect orientation") {
    PairSet s(PairOrientation::upper_triangle);
    s.add({2, 0});  // canonicalized to (0, 2)
    CHECK(s.contains({0, 2}));
    CHECK(s.size() == 1);
    s.add({0, 2});  // duplicate ignored
    CHECK(s.size() == 1);
    CHECK_THROWS(s.add({1, 1}));

    PairSet other(PairOrientation::upper_triangle);
    other.add({0, 2});
    other.add({1, 2});
    PairSet common = s.intersect(other);
    REQUIRE(common.size() == 1);
    CHECK(common.pairs()[0] == PairId{0, 2});
}
