// test_cli.cpp -- command-line front end: exit codes, report shape, and
// byte-identical reruns.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vsiv/cli.hpp"

using namespace vsiv;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_d4(const std::string& path) {
    std::ofstream out(path);
    out << "y,d,z\n1,1,z1\n2,0,z1\n1,1,z2\n3,1,z2\n";
}

// Simulated two-instrument extract large enough for a stable Wald test.
void write_sim(const std::string& path) {
    DgpSpec spec;
    spec.family = DgpSpec::Family::custom;
    auto [ds, latents] = draw(spec, 800, 424242);
    std::ofstream out(path);
    out << "y,d,z\n";
    out.precision(17);
    for (const auto& r : ds.rows)
        out << r.y << "," << r.d << "," << ds.instrument_labels[r.z] << "\n";
}

}  // namespace

TEST_CASE("falsify writes the worked-example statistics and reruns identically") {
    write_d4("cli_d4.tmp.csv");
    std::vector<std::string> args = {"falsify", "--input", "cli_d4.tmp.csv",
                                     "--out",   "cli_fal.tmp.csv"};
    REQUIRE(cli::run(args) == 0);
    std::string first = slurp("cli_fal.tmp.csv");
    REQUIRE(cli::run(args) == 0);
    CHECK(slurp("cli_fal.tmp.csv") == first);

    csv::Table t = csv::read_file("cli_fal.tmp.csv");
    REQUIRE(t.rows.size() == 2);
    int sc = t.column("statistic");
    REQUIRE(sc >= 0);
    CHECK(csv::parse_double(t.rows[0][sc]).value() == Catch::Approx(0.0).margin(1e-12));
    CHECK(csv::parse_double(t.rows[1][sc]).value() ==
          Catch::Approx(1.4142135623730951).margin(1e-12));
    std::remove("cli_d4.tmp.csv");
    std::remove("cli_fal.tmp.csv");
}

TEST_CASE("estimate reports both pair ratios of the worked example") {
    write_d4("cli_d4b.tmp.csv");
    std::vector<std::string> args = {"estimate", "--input", "cli_d4b.tmp.csv",
                                     "--tau",    "4",       "--out",
                                     "cli_est.tmp.csv"};
    REQUIRE(cli::run(args) == 0);
    csv::Table t = csv::read_file("cli_est.tmp.csv");
    REQUIRE(t.rows.size() == 2);
    int bc = t.column("beta");
    REQUIRE(bc >= 0);
    CHECK(csv::parse_double(t.rows[0][bc]).value() == Catch::Approx(1.0).margin(1e-10));
    CHECK(csv::parse_double(t.rows[1][bc]).value() == Catch::Approx(1.0).margin(1e-10));
    std::remove("cli_d4b.tmp.csv");
    std::remove("cli_est.tmp.csv");
}

TEST_CASE("test subcommand runs the two-part test end to end") {
    write_sim("cli_sim.tmp.csv");
    {
        std::ofstream hyp("cli_hyp.tmp.csv");
        hyp << "pair,0,1\nA,1\nb,1.0\n";
    }
    std::vector<std::string> args = {"test",  "--input",      "cli_sim.tmp.csv",
                                     "--tau", "4",            "--hypothesis",
                                     "cli_hyp.tmp.csv", "--out", "cli_test.tmp.csv"};
    REQUIRE(cli::run(args) == 0);
    csv::Table t = csv::read_file("cli_test.tmp.csv");
    REQUIRE(t.rows.size() == 1);
    int c1 = t.column("ts1"), c2 = t.column("ts2"), cr = t.column("reject");
    REQUIRE(c1 >= 0);
    CHECK(t.rows[0][c1] == "1");  // a fully valid design passes the screen
    CHECK(csv::parse_double(t.rows[0][c2]).value() >= 0.0);
    CHECK((t.rows[0][cr] == "0" || t.rows[0][cr] == "1"));
    std::remove("cli_sim.tmp.csv");
    std::remove("cli_hyp.tmp.csv");
    std::remove("cli_test.tmp.csv");
}

TEST_CASE("simulate emits a deterministic tau-by-pair table") {
    std::vector<std::string> args = {"simulate", "--family", "custom", "--n",   "120",
                                     "--reps",   "5",        "--tau-grid", "3:5:1",
                                     "--seed",   "9",        "--out", "cli_simtab.tmp.csv"};
    REQUIRE(cli::run(args) == 0);
    std::string first = slurp("cli_simtab.tmp.csv");
    REQUIRE(cli::run(args) == 0);
    CHECK(slurp("cli_simtab.tmp.csv") == first);
    csv::Table t = csv::read_file("cli_simtab.tmp.csv");
    REQUIRE(t.rows.size() == 3);  // tau = 3, 4, 5
    REQUIRE(t.header.size() == 2);  // tau + the single custom pair
    for (const auto& row : t.rows) {
        double f = csv::parse_double(row[1]).value();
        REQUIRE(f >= 0.0);
        REQUIRE(f <= 1.0);
    }
    std::remove("cli_simtab.tmp.csv");
}

TEST_CASE("bad invocations exit nonzero with a diagnostic") {
    CHECK(cli::run({"falsify", "--input", "no_such_file.csv"}) != 0);
    CHECK(cli::run({"falsify"}) != 0);          // missing required flag
    CHECK(cli::run({"unknown-subcommand"}) != 0);
    CHECK(cli::run(std::vector<std::string>{}) != 0);
    write_d4("cli_d4c.tmp.csv");
    CHECK(cli::run({"falsify", "--input", "cli_d4c.tmp.csv", "--mode", "sideways"}) != 0);
    CHECK(cli::run({"estimate", "--input", "cli_d4c.tmp.csv", "--mode", "unordered"}) != 0);
    std::remove("cli_d4c.tmp.csv");
}
