// cli.hpp -- command-line front end: falsify, tune-tau, estimate, test, and
// simulate subcommands, configuration handling, and CSV report emission.
//
// Reports are plain CSV bodies under a '#'-prefixed provenance header
// (command line, seed, n, tau) so that reruns with identical flags produce
// byte-identical files.

#ifndef VSIV_CLI_HPP
#define VSIV_CLI_HPP

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsiv/csv.hpp"
#include "vsiv/dataset.hpp"
#include "vsiv/estimate.hpp"
#include "vsiv/infer.hpp"
#include "vsiv/pairs.hpp"
#include "vsiv/simulate.hpp"
#include "vsiv/sup_stats.hpp"
#include "vsiv/unordered.hpp"
#include "vsiv/validity_set.hpp"

namespace vsiv {
namespace cli {

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

inline std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    if (s.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream is(s);
        if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw std::runtime_error("bad grid '" + s + "' (expected start:end:step)");
        for (double t = a; t <= b + 1e-9; t += step) grid.push_back(t);
    } else {
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ',')) grid.push_back(std::stod(tok));
    }
    if (grid.empty()) throw std::runtime_error("empty tau grid");
    return grid;
}

struct CommonInput {
    std::string input;
    std::string ycol = "y", dcol = "d", zcol = "z";
    std::string mode = "binary";
    std::string variant = "abs";
    std::string endpoints = "all";
    int endpoint_count = 200;
    std::uint64_t endpoint_seed = 0;
    double xi0 = 0.001;
    int threads = 0;  // accepted for interface stability; computations are
                      // deterministic regardless of the value

    void attach(CLI::App* app, bool need_input = true) {
        auto* opt = app->add_option("--input", input, "input CSV file");
        if (need_input) opt->required();
        app->add_option("--y-col", ycol, "outcome column name");
        app->add_option("--d-col", dcol, "treatment column name");
        app->add_option("--z-col", zcol, "instrument column name");
        app->add_option("--mode", mode, "treatment mode: binary|ordered|unordered");
        app->add_option("--variant", variant, "statistic variant: abs|pos");
        app->add_option("--endpoints", endpoints, "endpoint policy: all|subsample");
        app->add_option("--endpoint-count", endpoint_count, "subsample endpoint count");
        app->add_option("--endpoint-seed", endpoint_seed, "subsample endpoint seed");
        app->add_option("--xi0", xi0, "variance floor in the normalized ratio");
        app->add_option("--threads", threads, "worker thread count")
            ->envname("VSIV_THREADS");
    }

    Dataset load() const {
        CsvSchema schema;
        schema.y_column = ycol;
        schema.d_column = dcol;
        schema.z_column = zcol;
        schema.ordered_treatment = mode != "unordered";
        return ingest_csv(input, schema);
    }

    SupConfig sup_config() const {
        SupConfig cfg;
        if (mode == "binary") cfg.mode = TreatmentMode::binary;
        else if (mode == "ordered") cfg.mode = TreatmentMode::ordered;
        else if (mode == "unordered") cfg.mode = TreatmentMode::unordered;
        else throw std::runtime_error("unknown mode '" + mode + "'");
        if (variant == "abs") cfg.variant = SupVariant::abs_sup;
        else if (variant == "pos") cfg.variant = SupVariant::pos_part;
        else throw std::runtime_error("unknown variant '" + variant + "'");
        if (endpoints == "all") cfg.endpoints = EndpointPolicy::all_realized();
        else if (endpoints == "subsample")
            cfg.endpoints = EndpointPolicy::subsample(endpoint_count, endpoint_seed);
        else throw std::runtime_error("unknown endpoint policy '" + endpoints + "'");
        cfg.xi0 = xi0;
        return cfg;
    }
};

inline void provenance(csv::Writer& w, const std::vector<std::string>& args) {
    std::string cmd = "vsiv";
    for (const auto& a : args) cmd += " " + a;
    w.comment(cmd);
}

inline PairSet read_pair_file(const std::string& path, const Dataset& ds,
                              PairOrientation orient) {
    csv::Table t = csv::read_file(path);
    int kc = t.column("k"), kpc = t.column("kprime");
    if (kc < 0 || kpc < 0)
        throw std::runtime_error(path + ": expected columns k,kprime");
    auto zindex = [&](const std::string& lab) {
        for (int k = 0; k < ds.K(); ++k)
            if (ds.instrument_labels[k] == lab) return k;
        throw std::runtime_error(path + ": unknown instrument label '" + lab + "'");
    };
    PairSet out(orient);
    for (const auto& row : t.rows) out.add({zindex(row[kc]), zindex(row[kpc])});
    return out;
}

inline GFunction read_g_spec(const std::string& spec, const Dataset& ds) {
    GFunction g;
    if (spec.empty() || spec == "index") return g;
    csv::Table t = csv::read_file(spec);
    int zc = t.column("z"), vc = t.column("g");
    if (zc < 0 || vc < 0) throw std::runtime_error(spec + ": expected columns z,g");
    g.values.assign(ds.K(), 0.0);
    std::vector<bool> seen(ds.K(), false);
    for (const auto& row : t.rows) {
        int k = -1;
        for (int z = 0; z < ds.K(); ++z)
            if (ds.instrument_labels[z] == row[zc]) k = z;
        if (k < 0) throw std::runtime_error(spec + ": unknown instrument label '" + row[zc] + "'");
        auto v = csv::parse_double(row[vc]);
        if (!v) throw std::runtime_error(spec + ": unparseable g value '" + row[vc] + "'");
        g.values[k] = *v;
        seen[k] = true;
    }
    for (int z = 0; z < ds.K(); ++z)
        if (!seen[z]) throw std::runtime_error(spec + ": no g value for instrument '" +
                                               ds.instrument_labels[z] + "'");
    return g;
}

inline ResponseMatrix read_response_matrix(const std::string& path, const Dataset& ds) {
    csv::Table t = csv::read_file(path);
    ResponseMatrix R;
    R.K = static_cast<int>(t.rows.size());
    if (R.K != ds.K())
        throw std::runtime_error(path + ": response matrix must have K rows");
    std::size_t ncols = t.header.size();
    R.columns.assign(ncols, std::vector<int>(R.K, 0));
    auto dindex = [&](const std::string& lab) {
        auto v = csv::parse_double(lab);
        if (v)
            for (int j = 0; j < ds.J(); ++j)
                if (ds.treatment_support[j] == *v) return j;
        throw std::runtime_error(path + ": unknown treatment label '" + lab + "'");
    };
    // Header row is the first type row as well when it parses as labels;
    // require a plain header "t1,t2,..." and data rows of treatment labels.
    for (int k = 0; k < R.K; ++k) {
        if (t.rows[k].size() < ncols)
            throw std::runtime_error(path + ": short row in response matrix");
        for (std::size_t c = 0; c < ncols; ++c) R.columns[c][k] = dindex(t.rows[k][c]);
    }
    R.validate(ds.J());
    return R;
}

inline std::string pair_label(const Dataset& ds, const PairId& p) {
    return ds.instrument_labels[p.k] + ":" + ds.instrument_labels[p.kprime];
}

// --- subcommand bodies -----------------------------------------------------

inline int cmd_falsify(const CommonInput& in, double tau, const std::string& out_path,
                       const std::vector<std::string>& args) {
    Dataset ds = in.load();
    GroupTables t(ds);
    SupConfig cfg = in.sup_config();
    PairOrientation orient = cfg.mode == TreatmentMode::unordered
                                 ? PairOrientation::upper_triangle
                                 : PairOrientation::both_directions;
    std::vector<double> endpoints = select_endpoints(ds, cfg.endpoints);
    std::vector<SupStatistic> stats = sup_stats_universe(t, endpoints, cfg, orient);

    const bool multivalued = ds.J() > 2;
    PartitionCollection pc;
    if (multivalued) pc = PartitionCollection::quantile_default(ds);

    csv::Writer w(out_path);
    provenance(w, args);
    w.comment("n=" + std::to_string(ds.n()) + " tau=" + fmt(tau));
    std::vector<std::string> header = {"k",         "kprime",    "statistic", "t_n",
                                       "degenerate", "witness_kind", "witness_d",
                                       "witness_a", "witness_b", "witness_sign"};
    if (multivalued) {
        header.push_back("psi1");
        header.push_back("psi2");
        header.push_back("psi3");
    }
    w.row(header);
    std::cout << "pair statistic (tau=" << tau << ")\n";
    for (const auto& s : stats) {
        std::vector<std::string> row = {
            ds.instrument_labels[s.pair.k],
            ds.instrument_labels[s.pair.kprime],
            fmt(s.value),
            fmt(s.t_n),
            s.degenerate ? "1" : "0",
            s.witness.kind == HFunction::Kind::signed_interval ? "interval" : "fosd",
            std::to_string(s.witness.kind == HFunction::Kind::signed_interval
                               ? s.witness.d
                               : s.witness.c_index),
            fmt(s.witness.a),
            fmt(s.witness.b),
            std::to_string(s.witness.sign)};
        if (multivalued) {
            PsiReport rep = psi_bounds(t, s.pair, pc);
            row.push_back(fmt(rep.psi1));
            row.push_back(fmt(rep.psi2));
            row.push_back(fmt(rep.psi3));
        }
        w.row(row);
        std::cout << pair_label(ds, s.pair) << "  " << s.value
                  << (s.value <= tau ? "  (pass)" : "  (fail)") << "\n";
    }
    return 0;
}

inline int cmd_tune_tau(const CommonInput& in, const std::string& grid_spec, int reps,
                        std::uint64_t seed, double floor, int n_override,
                        const std::string& out_path, const std::vector<std::string>& args) {
    Dataset ds = in.load();
    std::vector<double> grid = parse_grid(grid_spec);
    TuneReport rep = tune_tau(ds, grid, reps, seed, floor, n_override);

    csv::Writer w(out_path);
    provenance(w, args);
    w.comment("reps=" + std::to_string(reps) + " seed=" + std::to_string(seed) +
              " floor=" + fmt(floor));
    if (rep.found)
        w.comment("recommended_tau=" + fmt(rep.recommended));
    else
        w.comment("recommended_tau=none (no grid point met the floor)");
    w.row({"dgp", "tau", "pair", "rate"});
    for (std::size_t v = 0; v < rep.designs.size(); ++v) {
        const auto& d = rep.designs[v];
        for (std::size_t ti = 0; ti < d.tau_grid.size(); ++ti)
            for (std::size_t p = 0; p < d.pairs.size(); ++p)
                w.row({std::to_string(v + 1), fmt(d.tau_grid[ti]),
                       pair_label(ds, d.pairs[p]), fmt(d.freq[ti][p])});
    }
    if (rep.found)
        std::cout << "recommended tau: " << rep.recommended << "\n";
    else
        std::cout << "no grid point met the selection floor " << floor << "\n";
    return 0;
}

inline int cmd_estimate(const CommonInput& in, double tau, const std::string& presumed_path,
                        const std::string& g_spec, const std::string& response_path,
                        const std::string& out_path, const std::vector<std::string>& args) {
    Dataset ds = in.load();
    GroupTables t(ds);
    Z0Config z0cfg;
    z0cfg.sup = in.sup_config();
    ValiditySetEstimate est = estimate_z0(ds, t, tau, z0cfg);

    PairSet selected = est.selected;
    if (!presumed_path.empty())
        selected = intersect_presumed(est, read_pair_file(presumed_path, ds,
                                                          selected.orientation()));

    csv::Writer w(out_path);
    provenance(w, args);
    w.comment("n=" + std::to_string(ds.n()) + " tau=" + fmt(tau));

    if (z0cfg.sup.mode == TreatmentMode::unordered) {
        if (response_path.empty())
            throw std::runtime_error("unordered mode requires --response-matrix");
        ResponseMatrix R = read_response_matrix(response_path, ds);
        w.row({"k", "kprime", "selected", "statistic", "d", "t", "probability", "mean",
               "degenerate", "inconsistent"});
        for (const auto& rec : est.per_pair) {
            bool sel = selected.contains(rec.pair);
            for (int d = 0; d < ds.J(); ++d) {
                for (int tt = 1; tt <= 2; ++tt) {
                    Counterfactual c = counterfactuals(ds, rec.pair, R, d, tt);
                    w.row({ds.instrument_labels[rec.pair.k],
                           ds.instrument_labels[rec.pair.kprime], sel ? "1" : "0",
                           fmt(rec.statistic), std::to_string(d), std::to_string(tt),
                           fmt(c.probability), fmt(c.mean), c.degenerate ? "1" : "0",
                           c.inconsistent ? "1" : "0"});
                }
            }
        }
        std::cout << "unordered counterfactual report written to " << out_path << "\n";
        return 0;
    }

    GFunction g = read_g_spec(g_spec, ds);
    LateEstimate late = estimate_lates(ds, selected, g);
    w.row({"k", "kprime", "beta", "se", "selected", "statistic", "first_stage", "n_sub",
           "degenerate"});
    std::cout << "pair  beta\n";
    for (std::size_t i = 0; i < late.universe.size(); ++i) {
        const PairId& p = late.universe.pairs()[i];
        const PairDiagnostics& diag = late.diagnostics[i];
        double se = std::sqrt(std::max(0.0, late.sigma(i, i)) / late.n);
        double stat = 0.0;
        for (const auto& rec : est.per_pair)
            if (rec.pair == p) stat = rec.statistic;
        w.row({ds.instrument_labels[p.k], ds.instrument_labels[p.kprime],
               fmt(late.beta[i]), fmt(se), diag.selected ? "1" : "0", fmt(stat),
               fmt(diag.first_stage), std::to_string(diag.n_sub),
               diag.degenerate ? "1" : "0"});
        std::cout << pair_label(ds, p) << "  " << late.beta[i] << "\n";
    }
    return 0;
}

inline int cmd_test(const CommonInput& in, double tau, const std::string& hyp_path,
                    double alpha, const std::string& g_spec, const std::string& out_path,
                    const std::vector<std::string>& args) {
    Dataset ds = in.load();
    GroupTables t(ds);
    Z0Config z0cfg;
    z0cfg.sup = in.sup_config();
    ValiditySetEstimate z0 = estimate_z0(ds, t, tau, z0cfg);
    GFunction g = read_g_spec(g_spec, ds);
    LateEstimate late = estimate_lates(ds, z0.selected, g);

    // Hypothesis file: rows tagged in the first column -- "pair,<k>,<kprime>"
    // listing the S pairs, "A,<v1>,...,<vS>" rows of the restriction matrix,
    // and "b,<v>" rows of its right-hand side.
    csv::Table ht = csv::read_file(hyp_path);
    Hypothesis hyp;
    std::vector<std::vector<double>> arows;
    std::vector<double> brows;
    auto zindex = [&](const std::string& lab) {
        for (int k = 0; k < ds.K(); ++k)
            if (ds.instrument_labels[k] == lab) return k;
        throw std::runtime_error(hyp_path + ": unknown instrument label '" + lab + "'");
    };
    auto handle = [&](const std::vector<std::string>& row) {
        if (row.empty()) return;
        if (row[0] == "pair") {
            if (row.size() < 3) throw std::runtime_error(hyp_path + ": short pair row");
            hyp.pairs.push_back({zindex(row[1]), zindex(row[2])});
        } else if (row[0] == "A") {
            std::vector<double> r;
            for (std::size_t j = 1; j < row.size(); ++j) r.push_back(std::stod(row[j]));
            arows.push_back(r);
        } else if (row[0] == "b") {
            if (row.size() < 2) throw std::runtime_error(hyp_path + ": short b row");
            brows.push_back(std::stod(row[1]));
        } else {
            throw std::runtime_error(hyp_path + ": unknown row tag '" + row[0] + "'");
        }
    };
    handle(ht.header);
    for (const auto& row : ht.rows) handle(row);
    const int S = static_cast<int>(hyp.pairs.size());
    const int r = static_cast<int>(arows.size());
    if (S < 1 || r < 1 || brows.size() != arows.size())
        throw std::runtime_error(hyp_path + ": need pair rows, A rows, and matching b rows");
    hyp.A.resize(r, S);
    hyp.rhs.resize(r);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(arows[i].size()) != S)
            throw std::runtime_error(hyp_path + ": A row length differs from pair count");
        for (int j = 0; j < S; ++j) hyp.A(i, j) = arows[i][j];
        hyp.rhs(i) = brows[i];
    }

    TestResult res = wald_test(late, hyp, alpha);
    csv::Writer w(out_path);
    provenance(w, args);
    w.row({"ts1", "ts2", "critical", "alpha", "df", "reject"});
    w.row({std::to_string(res.ts1), fmt(res.ts2), fmt(res.critical), fmt(res.alpha),
           std::to_string(res.df), res.reject ? "1" : "0"});
    std::cout << "TS1=" << res.ts1 << " TS2=" << res.ts2 << " critical=" << res.critical
              << " -> " << (res.reject ? "reject" : "fail to reject") << "\n";
    return 0;
}

inline int cmd_simulate(const std::string& family, int n, int reps,
                        const std::string& grid_spec, std::uint64_t seed,
                        const std::string& out_path, const std::vector<std::string>& args) {
    DgpSpec spec;
    auto colon = family.find(':');
    std::string fam = colon == std::string::npos ? family : family.substr(0, colon);
    if (fam == "section5") spec.family = DgpSpec::Family::section5;
    else if (fam == "qob") spec.family = DgpSpec::Family::qob;
    else if (fam == "custom") spec.family = DgpSpec::Family::custom;
    else throw std::runtime_error("unknown family '" + family + "'");
    if (colon != std::string::npos) spec.variant = std::stoi(family.substr(colon + 1));

    std::vector<double> grid = parse_grid(grid_spec);
    SimulationReport rep = mc_selection_table(spec, n, reps, grid, seed);

    csv::Writer w(out_path);
    provenance(w, args);
    w.comment("family=" + rep.family + " n=" + std::to_string(n) +
              " reps=" + std::to_string(reps) + " seed=" + std::to_string(seed));
    std::vector<std::string> header = {"tau"};
    for (const auto& p : rep.pairs)
        header.push_back(std::to_string(p.k) + ":" + std::to_string(p.kprime));
    w.row(header);
    for (std::size_t ti = 0; ti < rep.tau_grid.size(); ++ti) {
        std::vector<std::string> row = {fmt(rep.tau_grid[ti])};
        for (std::size_t p = 0; p < rep.pairs.size(); ++p)
            row.push_back(fmt(rep.freq[ti][p]));
        w.row(row);
    }
    std::cout << "selection table (" << rep.family << ", n=" << n << ", reps=" << reps
              << ") written to " << out_path << "\n";
    return 0;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"validity-screened pairwise IV estimation"};
    app.set_config("--config", "", "key=value configuration file");
    app.require_subcommand(1);

    detail::CommonInput in;
    double tau = 4.0, alpha = 0.05, floor = 0.98;
    std::string out_path = "report.csv", grid_spec = "2:6.5:0.5";
    std::string presumed_path, g_spec = "index", response_path, hyp_path;
    std::string family = "section5:1";
    int n = 1500, reps = 1000, n_override = 0;
    std::uint64_t seed = 1;

    auto* falsify = app.add_subcommand("falsify", "per-pair falsification statistics");
    in.attach(falsify);
    falsify->add_option("--tau", tau, "pass/fail threshold for the display");
    falsify->add_option("--out", out_path, "output CSV path");

    auto* tunetau = app.add_subcommand("tune-tau", "threshold tuning via calibrated designs");
    in.attach(tunetau);
    tunetau->add_option("--tau-grid", grid_spec, "grid start:end:step or comma list");
    tunetau->add_option("--reps", reps, "Monte Carlo replications");
    tunetau->add_option("--seed", seed, "master seed");
    tunetau->add_option("--floor", floor, "valid-pair selection floor");
    tunetau->add_option("--n", n_override, "simulated sample size (default: data size)");
    tunetau->add_option("--out", out_path, "output CSV path");

    auto* estimate = app.add_subcommand("estimate", "validity screening + pairwise estimates");
    in.attach(estimate);
    estimate->add_option("--tau", tau, "selection threshold");
    estimate->add_option("--presumed", presumed_path, "presumed pair set CSV (k,kprime)");
    estimate->add_option("--g", g_spec, "instrument score: 'index' or CSV path (z,g)");
    estimate->add_option("--response-matrix", response_path,
                         "response matrix CSV (unordered mode)");
    estimate->add_option("--out", out_path, "output CSV path");

    auto* test = app.add_subcommand("test", "two-part Wald test");
    in.attach(test);
    test->add_option("--tau", tau, "selection threshold");
    test->add_option("--hypothesis", hyp_path, "hypothesis file")->required();
    test->add_option("--alpha", alpha, "test level");
    test->add_option("--g", g_spec, "instrument score: 'index' or CSV path (z,g)");
    test->add_option("--out", out_path, "output CSV path");

    auto* simulate = app.add_subcommand("simulate", "selection-probability tables");
    simulate->add_option("--family", family, "section5:V | qob:V | custom");
    simulate->add_option("--n", n, "sample size per replication");
    simulate->add_option("--reps", reps, "Monte Carlo replications");
    simulate->add_option("--tau-grid", grid_spec, "grid start:end:step or comma list");
    simulate->add_option("--seed", seed, "master seed");
    simulate->add_option("--out", out_path, "output CSV path");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream dummy;
        int code = app.exit(e, dummy, dummy);
        if (code != 0) std::cerr << "error: " << e.what() << "\n";
        else std::cout << app.help();
        return code;
    }

    try {
        if (falsify->parsed()) return detail::cmd_falsify(in, tau, out_path, args);
        if (tunetau->parsed())
            return detail::cmd_tune_tau(in, grid_spec, reps, seed, floor, n_override,
                                        out_path, args);
        if (estimate->parsed())
            return detail::cmd_estimate(in, tau, presumed_path, g_spec, response_path,
                                        out_path, args);
        if (test->parsed())
            return detail::cmd_test(in, tau, hyp_path, alpha, g_spec, out_path, args);
        if (simulate->parsed())
            return detail::cmd_simulate(family, n, reps, grid_spec, seed, out_path, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand given\n";
    return 1;
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace cli
}  // namespace vsiv

#endif  // VSIV_CLI_HPP
