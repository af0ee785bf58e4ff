#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mg1fp/analysis.hpp"
#include "mg1fp/problems.hpp"
#include "mg1fp/solvers.hpp"

namespace mg1fp::cli {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_validation = 2;
constexpr int exit_no_convergence = 3;

inline std::string fmt17(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

struct ModelOptions {
    std::string file;
    bool example_1a = false;
    int n = 100;
    double delta = 1e-2;
    bool example_1b = false;
    double p = 0.3;
    int q_trunc = 50;

    void attach(CLI::App* app) {
        app->add_option("--model", file, "model file (text block format)");
        app->add_flag("--example-1a", example_1a, "built-in block-tridiagonal chain; uses --n, --delta");
        app->add_option("--n", n, "block size for --example-1a");
        app->add_option("--delta", delta, "drift parameter for --example-1a, in (0,1)");
        app->add_flag("--example-1b", example_1b, "built-in geometric-tail chain; uses --p, --q-trunc");
        app->add_option("--p", p, "tail parameter for --example-1b, in (0, 0.6]");
        app->add_option("--q-trunc", q_trunc, "truncation index for --example-1b");
    }

    MG1Model resolve() const {
        const int sources = (file.empty() ? 0 : 1) + (example_1a ? 1 : 0) + (example_1b ? 1 : 0);
        if (sources != 1)
            throw CLI::ValidationError("model source",
                                       "need exactly one of --model, --example-1a, --example-1b");
        if (!file.empty()) return load_model(file);
        if (example_1a) return gen_example_1a(n, delta);
        return gen_example_1b(p, q_trunc);
    }
};

/// Prints advisory validation findings; returns true when a fatal issue exists.
inline bool report_validation(const MG1Model& model, std::ostream& err) {
    bool fatal = false;
    for (const ValidationIssue& issue : validate(model)) {
        if (issue.fatal()) {
            err << "error: " << issue.describe() << '\n';
            fatal = true;
        } else {
            err << "warning: " << issue.describe() << '\n';
        }
    }
    return fatal;
}

inline Method parse_method(const std::string& name, double omega, double omega_hat) {
    if (name == "natural") return Method::natural();
    if (name == "traditional") return Method::traditional();
    if (name == "ubased") return Method::ubased();
    if (name == "staircase") return Method::staircase();
    if (name == "relaxed") return Method::relaxed(omega);
    if (name == "adaptive-zero") return Method::adaptive_zero(omega_hat);
    if (name == "adaptive-stochastic") return Method::adaptive_stochastic(omega_hat);
    throw CLI::ValidationError("--method", "unknown method '" + name + "'");
}

inline StartMatrix parse_start(const std::string& spec) {
    if (spec == "zero") return StartMatrix::zero();
    if (spec == "uniform") return StartMatrix::uniform();
    if (spec.rfind("file:", 0) == 0) return StartMatrix::given(load_matrix(spec.substr(5)));
    throw CLI::ValidationError("--start", "expected zero, uniform, or file:PATH");
}

inline void write_trace_csv(const std::string& path, const std::vector<TracePoint>& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "k,residual,omega,seconds\n";
    for (const TracePoint& t : trace)
        out << t.k << ',' << fmt17(t.residual) << ',' << fmt17(t.omega) << ','
            << std::fixed << std::setprecision(6) << t.seconds << std::defaultfloat << '\n';
}

// ---------------------------------------------------------------- solve ----

struct SolveArgs {
    ModelOptions model;
    std::string method = "traditional";
    double omega = 1.0;
    double omega_hat = 10.0;
    double tol = 1e-13;
    long long max_iter = 10000000;
    long long trace_every = 1;
    std::string start = "zero";
    std::string trace_path;
    std::string out_path;
};

inline int run_solve(const SolveArgs& a) {
    std::optional<MG1Model> loaded;
    try {
        loaded.emplace(a.model.resolve());
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    const MG1Model& model = *loaded;
    if (report_validation(model, std::cerr)) return exit_validation;

    SolverConfig cfg;
    cfg.method = parse_method(a.method, a.omega, a.omega_hat);
    try {
        cfg.start = parse_start(a.start);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: start matrix rejected: " << e.what() << '\n';
        return exit_validation;
    }
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    cfg.trace_every = a.trace_every;

    std::cout << "method=" << cfg.method.name() << '\n';
    std::cout << "n=" << model.n() << " q=" << model.q() << " qbd=" << (is_qbd(model) ? "true" : "false")
              << '\n';
    try {
        const DriftReport d = drift(model);
        std::cout << "drift=" << fmt17(d.eta) << " classification=" << to_string(d.classification)
                  << '\n';
    } catch (const PerronFailure& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }

    const SolveResult res = solve(model, cfg);
    std::cout << "iterations=" << res.iterations << '\n';
    std::cout << "converged=" << (res.converged ? "true" : "false") << '\n';
    std::cout << "residual=" << fmt17(res.final_residual) << '\n';
    if (!res.trace.empty())
        std::cout << "elapsed_seconds=" << std::fixed << std::setprecision(6)
                  << res.trace.back().seconds << std::defaultfloat << '\n';
    if (!a.trace_path.empty()) write_trace_csv(a.trace_path, res.trace);
    if (!a.out_path.empty())
        save_matrix(res.G, a.out_path,
                    "G approximation, method=" + std::string(cfg.method.name()) +
                        ", residual=" + fmt17(res.final_residual));
    return res.converged ? exit_ok : exit_no_convergence;
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
    std::string table;   // "1a" or "1b"
    int n = 100;
    std::vector<double> deltas{1e-2};
    std::vector<double> ps{0.3};
    int q_trunc = 50;
    std::vector<std::string> methods;
    std::vector<double> omegas{2.0};
    double omega_hat = 10.0;
    double tol = 1e-13;
    long long max_iter = 10000000;
    long long trace_every = 100;
    int jobs = 1;
    double gamma = 1.0;
    std::string start = "zero";
    std::string csv_path;
};

struct BenchRow {
    std::string method_label;
    Method method = Method::traditional();
    int n = 0;
    int q = 0;
    std::string param_name;
    double param_value = 0.0;
    double omega = 0.0;
    long long iterations = 0;
    bool converged = false;
    double final_residual = 0.0;
    double elapsed_seconds = 0.0;
    double estimated_ops = 0.0;
    std::string error;
};

inline int run_bench(const BenchArgs& a) {
    if (a.methods.empty()) {
        std::cerr << "error: --methods list is empty\n";
        return exit_usage;
    }
    if (a.table != "1a" && a.table != "1b") {
        std::cerr << "error: --table must be 1a or 1b\n";
        return exit_usage;
    }
    const bool is_1a = a.table == "1a";
    const std::vector<double>& params = is_1a ? a.deltas : a.ps;
    const std::string param_name = is_1a ? "delta" : "p";
    if (params.empty()) {
        std::cerr << "error: empty parameter list\n";
        return exit_usage;
    }

    StartMatrix start;
    try {
        start = parse_start(a.start);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: start matrix rejected: " << e.what() << '\n';
        return exit_validation;
    }

    struct Cell {
        double param;
        std::string method_name;
        double omega;
        std::string label;
    };
    std::vector<Cell> cells;
    std::vector<std::string> labels;   // column order
    for (const std::string& m : a.methods) {
        if (m == "relaxed") {
            for (double w : a.omegas) {
                std::ostringstream label;
                label << "relaxed(" << w << ")";
                labels.push_back(label.str());
            }
        } else {
            parse_method(m, 1.0, a.omega_hat);   // validate the name up front
            labels.push_back(m);
        }
    }
    for (double prm : params)
        for (const std::string& m : a.methods) {
            if (m == "relaxed") {
                for (double w : a.omegas) {
                    std::ostringstream label;
                    label << "relaxed(" << w << ")";
                    cells.push_back({prm, m, w, label.str()});
                }
            } else {
                cells.push_back({prm, m, 1.0, m});
            }
        }

    std::vector<BenchRow> rows(cells.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (std::size_t i; (i = cursor.fetch_add(1)) < cells.size();) {
            const Cell& c = cells[i];
            BenchRow& row = rows[i];
            row.method_label = c.label;
            row.param_name = param_name;
            row.param_value = c.param;
            row.omega = c.omega;
            try {
                const MG1Model model =
                    is_1a ? gen_example_1a(a.n, c.param) : gen_example_1b(c.param, a.q_trunc);
                row.n = model.n();
                row.q = model.q();
                SolverConfig cfg;
                cfg.method = parse_method(c.method_name, c.omega, a.omega_hat);
                cfg.start = start;
                cfg.tol = a.tol;
                cfg.max_iter = a.max_iter;
                cfg.trace_every = a.trace_every;
                row.method = cfg.method;
                const SolveResult res = solve(model, cfg);
                row.iterations = res.iterations;
                row.converged = res.converged;
                row.final_residual = res.final_residual;
                row.elapsed_seconds = res.trace.empty() ? 0.0 : res.trace.back().seconds;
                row.estimated_ops =
                    cost_per_step(cfg.method, model.n(), model.q(), a.gamma) * res.iterations;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(a.jobs, static_cast<int>(cells.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    // aligned iteration-count table, one row per parameter value
    std::size_t width = 12;
    for (const std::string& l : labels) width = std::max(width, l.size() + 2);
    std::cout << std::left << std::setw(10) << param_name;
    for (const std::string& l : labels) std::cout << std::setw(static_cast<int>(width)) << l;
    std::cout << '\n';
    for (double prm : params) {
        std::ostringstream pv;
        pv << prm;
        std::cout << std::setw(10) << pv.str();
        for (const std::string& l : labels) {
            std::string cell = "-";
            for (const BenchRow& row : rows)
                if (row.param_value == prm && row.method_label == l) {
                    if (!row.error.empty())
                        cell = "error";
                    else if (!row.converged)
                        cell = std::to_string(row.iterations) + "*";
                    else
                        cell = std::to_string(row.iterations);
                }
            std::cout << std::setw(static_cast<int>(width)) << cell;
        }
        std::cout << '\n';
    }
    std::cout << "(* = iteration budget exhausted before tol)\n";

    if (!a.csv_path.empty()) {
        std::ofstream out(a.csv_path);
        if (!out) {
            std::cerr << "error: cannot open '" << a.csv_path << "' for writing\n";
            return exit_validation;
        }
        out << "method,n,q,param,value,omega,iterations,converged,final_residual,elapsed_seconds,"
               "estimated_ops,error\n";
        for (const BenchRow& r : rows)
            out << r.method_label << ',' << r.n << ',' << r.q << ',' << r.param_name << ','
                << fmt17(r.param_value) << ',' << fmt17(r.omega) << ',' << r.iterations << ','
                << (r.converged ? "true" : "false") << ',' << fmt17(r.final_residual) << ','
                << std::fixed << std::setprecision(6) << r.elapsed_seconds << std::defaultfloat
                << ',' << fmt17(r.estimated_ops) << ',' << r.error << '\n';
    }
    return exit_ok;
}

// -------------------------------------------------------------- analyze ----

struct AnalyzeArgs {
    ModelOptions model;
    double omega = 1.0;
    double tol = 1e-13;
    std::string omega_grid;        // LO:HI:STEP
    double staircase_lambda = 0.0; // 0 = off
    bool kron = false;
    std::string csv_path;
    std::string staircase_csv_path;
};

inline std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0 || hi < lo)
        throw CLI::ValidationError("--omega-grid", "expected LO:HI:STEP with STEP > 0");
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double w = lo + i * step;
        if (w > hi + 1e-12 * std::max(1.0, std::abs(hi))) break;
        grid.push_back(w);
    }
    return grid;
}

inline int run_analyze(const AnalyzeArgs& a) {
    std::optional<MG1Model> loaded;
    try {
        loaded.emplace(a.model.resolve());
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    const MG1Model& model = *loaded;
    if (report_validation(model, std::cerr)) return exit_validation;

    try {
        const DriftReport d = drift(model);
        std::cout << "drift=" << fmt17(d.eta) << " classification=" << to_string(d.classification)
                  << '\n';
    } catch (const PerronFailure& e) {
        std::cerr << "warning: " << e.what() << '\n';
    }

    SolverConfig cfg;
    cfg.method = Method::ubased();
    cfg.tol = a.tol;
    cfg.trace_every = 0;
    const SolveResult sol = solve(model, cfg);
    if (!sol.converged) {
        std::cerr << "error: reference solve did not converge (residual "
                  << fmt17(sol.final_residual) << ")\n";
        return exit_no_convergence;
    }
    const Mat& g = sol.G;
    const Mat w = build_W(model, g);

    const RateAnalysis ra = rho_bounds(model, g, w, a.omega);
    std::cout << "rho0=" << fmt17(ra.rho0) << '\n';
    if (std::isinf(ra.omega_hat))
        std::cout << "omega_hat_c1=inf\n";
    else
        std::cout << "omega_hat_c1=" << fmt17(ra.omega_hat) << '\n';
    if (ra.omega_hat_floored)
        std::cerr << "warning: componentwise cap fell below 1; omega_hat_c1 floored to 1\n";
    std::cout << "sigma_min=" << fmt17(ra.sigma_min) << " sigma_max=" << fmt17(ra.sigma_max) << '\n';
    std::cout << "omega=" << fmt17(a.omega) << " rho_omega=" << fmt17(ra.rho_omega) << " bound_lo="
              << fmt17(ra.bound_lo) << " bound_hi=" << fmt17(ra.bound_hi) << '\n';

    if (!a.omega_grid.empty()) {
        const std::vector<double> grid = parse_grid(a.omega_grid);
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!a.csv_path.empty()) {
            file.open(a.csv_path);
            if (!file) {
                std::cerr << "error: cannot open '" << a.csv_path << "' for writing\n";
                return exit_validation;
            }
            out = &file;
        }
        *out << "omega,rho_omega,bound_lo,bound_hi\n";
        for (double wv : grid) {
            const RateAnalysis r = rho_bounds(model, g, w, wv);
            *out << fmt17(wv) << ',' << fmt17(r.rho_omega) << ',' << fmt17(r.bound_lo) << ','
                 << fmt17(r.bound_hi) << '\n';
        }
    }

    if (a.staircase_lambda > 0.0) {
        const StaircaseOptimum opt = optimal_omega(a.staircase_lambda);
        std::cout << "staircase lambda=" << fmt17(a.staircase_lambda) << " omega_star="
                  << fmt17(opt.omega_star) << " rho_star=" << fmt17(opt.rho_star) << '\n';
        std::vector<double> grid;
        if (!a.omega_grid.empty())
            grid = parse_grid(a.omega_grid);
        else
            grid = parse_grid("1:2:0.01");
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!a.staircase_csv_path.empty()) {
            file.open(a.staircase_csv_path);
            if (!file) {
                std::cerr << "error: cannot open '" << a.staircase_csv_path << "' for writing\n";
                return exit_validation;
            }
            out = &file;
        }
        *out << "omega,rho_s\n";
        for (double wv : grid)
            *out << fmt17(wv) << ',' << fmt17(staircase_rho(a.staircase_lambda, wv)) << '\n';
    }

    if (a.kron) {
        if (model.n() > 32) {
            std::cerr << "warning: n=" << model.n() << " exceeds the Kronecker guard (32); skipping\n";
        } else {
            const KronAnalysis ka = kron_rates(model, g);
            std::cout << "rho_H0=" << fmt17(ka.rho_H0) << " rho_H1=" << fmt17(ka.rho_H1) << '\n';
        }
    }
    return exit_ok;
}

// ------------------------------------------------------------------ gen ----

struct GenArgs {
    std::string which;
    int n = 4;
    double delta = 0.1;
    double p = 0.3;
    int q_trunc = 50;
    std::string out_path;
};

inline int run_gen(const GenArgs& a) {
    MG1Model model = a.which == "1a" ? gen_example_1a(a.n, a.delta) : gen_example_1b(a.p, a.q_trunc);
    save_model(model, a.out_path);
    std::cout << "wrote " << a.out_path << " (n=" << model.n() << " q=" << model.q() << ")\n";
    return exit_ok;
}

// ----------------------------------------------------------------- main ----

inline int run(std::vector<std::string> args) {
    CLI::App app{"fixed-point solvers and convergence-rate analysis for M/G/1-type Markov chains"};
    app.require_subcommand(1);

    SolveArgs sa;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve for the minimal nonnegative G");
    sa.model.attach(solve_cmd);
    solve_cmd->add_option("--method", sa.method,
                          "natural|traditional|ubased|staircase|relaxed|adaptive-zero|adaptive-stochastic")
        ->capture_default_str();
    solve_cmd->add_option("--omega", sa.omega, "stationary relaxation weight (relaxed)")
        ->capture_default_str();
    solve_cmd->add_option("--omega-hat", sa.omega_hat, "adaptive search cap")->capture_default_str();
    solve_cmd->add_option("--tol", sa.tol, "residual stopping tolerance")->capture_default_str();
    solve_cmd->add_option("--max-iter", sa.max_iter, "iteration budget")->capture_default_str();
    solve_cmd->add_option("--start", sa.start, "zero|uniform|file:PATH")->capture_default_str();
    solve_cmd->add_option("--trace", sa.trace_path, "write per-iteration CSV k,residual,omega,seconds");
    solve_cmd->add_option("--trace-every", sa.trace_every, "record every K-th iteration")
        ->capture_default_str();
    solve_cmd->add_option("--out", sa.out_path, "write G in the textual block format");

    BenchArgs ba;
    CLI::App* bench_cmd = app.add_subcommand("bench", "iteration-count sweeps over built-in chains");
    bench_cmd->add_option("--table", ba.table, "1a or 1b")->required();
    bench_cmd->add_option("--n", ba.n, "block size (table 1a)")->capture_default_str();
    bench_cmd->add_option("--deltas", ba.deltas, "delta values (table 1a)")->delimiter(',');
    bench_cmd->add_option("--ps", ba.ps, "p values (table 1b)")->delimiter(',');
    bench_cmd->add_option("--p", ba.ps, "single p value (table 1b)");
    bench_cmd->add_option("--q-trunc", ba.q_trunc, "truncation index (table 1b)")->capture_default_str();
    bench_cmd->add_option("--methods", ba.methods, "comma-separated method list")
        ->delimiter(',')
        ->required();
    bench_cmd->add_option("--omegas", ba.omegas, "weights for the relaxed method")->delimiter(',');
    bench_cmd->add_option("--omega-hat", ba.omega_hat, "adaptive search cap")->capture_default_str();
    bench_cmd->add_option("--tol", ba.tol, "residual stopping tolerance")->capture_default_str();
    bench_cmd->add_option("--max-iter", ba.max_iter, "iteration budget")->capture_default_str();
    bench_cmd->add_option("--trace-every", ba.trace_every, "trace decimation")->capture_default_str();
    bench_cmd->add_option("--jobs", ba.jobs, "concurrent sweep cells")->capture_default_str();
    bench_cmd->add_option("--gamma", ba.gamma, "sparsity factor for the cost model")
        ->capture_default_str();
    bench_cmd->add_option("--start", ba.start, "zero|uniform|file:PATH")->capture_default_str();
    bench_cmd->add_option("--csv", ba.csv_path, "write per-cell CSV");

    AnalyzeArgs aa;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "convergence-rate quantities for a model");
    aa.model.attach(analyze_cmd);
    analyze_cmd->add_option("--omega", aa.omega, "weight for the rate matrix and bounds")
        ->capture_default_str();
    analyze_cmd->add_option("--tol", aa.tol, "tolerance of the internal reference solve")
        ->capture_default_str();
    analyze_cmd->add_option("--omega-grid", aa.omega_grid, "LO:HI:STEP grid for rate-vs-weight CSV");
    analyze_cmd->add_option("--staircase-lambda", aa.staircase_lambda,
                            "eigenvalue for the scalar staircase rate sweep");
    analyze_cmd->add_flag("--kron", aa.kron, "also report the vectorized one-step operator radii");
    analyze_cmd->add_option("--csv", aa.csv_path, "CSV path for the omega grid (default stdout)");
    analyze_cmd->add_option("--staircase-csv", aa.staircase_csv_path,
                            "CSV path for the staircase sweep (default stdout)");

    GenArgs ga;
    CLI::App* gen_cmd = app.add_subcommand("gen", "write a built-in model to a file");
    gen_cmd->add_option("generator", ga.which, "1a or 1b")
        ->required()
        ->check(CLI::IsMember({"1a", "1b"}));
    gen_cmd->add_option("--n", ga.n, "block size (1a)")->capture_default_str();
    gen_cmd->add_option("--delta", ga.delta, "drift parameter (1a)")->capture_default_str();
    gen_cmd->add_option("--p", ga.p, "tail parameter (1b)")->capture_default_str();
    gen_cmd->add_option("--q-trunc", ga.q_trunc, "truncation index (1b)")->capture_default_str();
    gen_cmd->add_option("--out", ga.out_path, "output path")->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*solve_cmd) return run_solve(sa);
        if (*bench_cmd) return run_bench(ba);
        if (*analyze_cmd) return run_analyze(aa);
        if (*gen_cmd) return run_gen(ga);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_usage;
}

inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? argc - 1 : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace mg1fp::cli
