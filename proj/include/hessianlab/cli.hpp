#pragma once

// Command-line driver: one subcommand per experiment, all outputs under --out.
// Exit codes: 0 success, 1 convergence (or check) failure, 2 input error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hessianlab/cone_inequalities.hpp"
#include "hessianlab/envelope.hpp"
#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/inequalities.hpp"
#include "hessianlab/operator.hpp"
#include "hessianlab/parallel.hpp"
#include "hessianlab/solver.hpp"

namespace hessianlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;

struct ExperimentConfig {
    int n = 2;
    int N = 16;
    int m = 1;
    std::string metric = "flat";
    std::uint64_t seed = 0;
    std::string out = "hessianlab-out";
    int threads = 0;

    SolverConfig solver;
    std::string preconditioner = "spectral";
    bool no_cone_guard = false;

    std::string H, f, h, psi, phi, u_star;
    std::vector<double> eps{1.0, 0.3, 0.1, 0.03, 0.01};
    std::vector<int> grids{8, 16, 32};
    std::vector<double> deltas{1e-1, 1e-2, 1e-3};
    std::vector<double> t_list{0.05, 0.1, 0.2, 0.5, 1.0, 1.5, 2.0};
    double p = 0.0;  // 0 → 2n/m
    double a = 0.0;  // 0 → 1/(m+2)
    bool allow_any_exponent = false;

    long samples = 100000;
    double tolerance = 1e-10;
};

/// "flat", "scale:s" (s·I) or "diag:a,b[,c]".
[[nodiscard]] inline MetricField parse_metric(const TorusGrid& grid, const std::string& text)
{
    if (text == "flat") return MetricField::flat(grid);
    const auto colon = text.find(':');
    require(colon != std::string::npos, "metric: expected flat, scale:s or diag:a,b[,c], got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    std::vector<double> values;
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw InputError("metric: bad number '" + tok + "'");
        }
    }
    if (kind == "scale") {
        require(values.size() == 1 && values[0] > 0.0, "metric: scale needs one positive value");
        std::vector<double> d(static_cast<std::size_t>(grid.n()), values[0]);
        return MetricField::constant(grid, HermitianForm::diagonal(d));
    }
    if (kind == "diag") {
        require(values.size() == static_cast<std::size_t>(grid.n()), "metric: diag needs n entries");
        for (double v : values) require(v > 0.0, "metric: diag entries must be positive");
        return MetricField::constant(grid, HermitianForm::diagonal(values));
    }
    throw InputError("metric: unknown kind '" + kind + "'");
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), "cannot open " + path.string() + " for writing");
    os << text;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc)
{
    write_text(path, doc.dump(2) + "\n");
}

inline nlohmann::json grid_echo(const ExperimentConfig& c)
{
    return {{"n", c.n}, {"N", c.N}, {"m", c.m}, {"metric", c.metric}};
}

inline SolverConfig resolved_solver(const ExperimentConfig& c)
{
    SolverConfig s = c.solver;
    if (c.preconditioner == "spectral") s.preconditioner = Preconditioner::Spectral;
    else if (c.preconditioner == "diagonal") s.preconditioner = Preconditioner::Diagonal;
    else throw InputError("preconditioner must be spectral or diagonal");
    s.cone_guard = !c.no_cone_guard;
    s.validate();
    return s;
}

inline void check_m(const ExperimentConfig& c, bool allow_m_equal_n = true)
{
    require(c.m >= 1 && (allow_m_equal_n ? c.m <= c.n : c.m < c.n), "m out of range for n");
}

inline void check_eps(const std::vector<double>& eps)
{
    require(!eps.empty(), "empty ε schedule");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0, "ε values must be positive");
        require(i == 0 || eps[i] < eps[i - 1], "ε schedule must decrease");
    }
}

inline FieldSpec required_spec(const std::string& text, const std::string& flag)
{
    require(!text.empty(), flag + " is required");
    return FieldSpec::parse(text);
}

inline void print_time(const char* what, double seconds)
{
    std::cout << what << " wallclock " << seconds << " s\n";
}

} // namespace detail

inline int run_verify_cone(const ExperimentConfig& c, const std::filesystem::path& out)
{
    require(c.n >= 2 && c.n <= 64, "verify-cone: need 2 <= n <= 64");
    detail::check_m(c, false);
    require(c.samples >= 1, "verify-cone: need samples >= 1");
    const auto start = std::chrono::steady_clock::now();
    const auto report = verify_cone_inequalities(c.n, c.m, c.samples, c.seed, c.tolerance);
    detail::write_json(out / "cone_report.json", report.to_json());
    detail::print_time("verify-cone", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    std::cout << "verify-cone n=" << c.n << " m=" << c.m << (report.all_passed() ? " all passed\n" : " VIOLATIONS\n");
    return report.all_passed() ? kExitOk : kExitFailure;
}

inline int run_solve(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    const TorusGrid grid(c.n, c.N);
    const auto spec = detail::required_spec(c.H, "--H");
    const SolverConfig cfg = detail::resolved_solver(c);
    const MetricField omega = parse_metric(grid, c.metric);
    const ScalarField H = make_field(grid, spec);
    SolveReport report;
    const ScalarField u = solve_exponential(H, omega, c.m, cfg, report);
    auto summary = report.summary();
    const auto mp = check_max_principle(u, H, 10.0 * cfg.newton_tol);
    summary["max_principle"] = {{"holds", mp.holds}, {"upper_margin", mp.upper_margin}, {"lower_margin", mp.lower_margin}};
    summary["laplacian_gradient_ratio"] = laplacian_gradient_ratio(u);
    detail::write_json(out / "solve_report.json", summary);
    detail::write_text(out / "newton.jsonl", report.records_jsonl());
    write_field((out / "u.field").string(), u);
    detail::print_time("solve", report.wallclock);
    return report.converged ? kExitOk : kExitFailure;
}

inline int run_normalized(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    detail::check_eps(c.eps);
    const TorusGrid grid(c.n, c.N);
    const auto spec = detail::required_spec(c.f, "--f");
    const SolverConfig cfg = detail::resolved_solver(c);
    const MetricField omega = parse_metric(grid, c.metric);
    const ScalarField f = make_field(grid, spec);
    SolveReport report;
    const NormalizedSolution sol = solve_normalized(f, omega, c.m, c.eps, cfg, report);
    auto summary = report.summary();
    auto finite = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
    summary["c"] = sol.c;
    summary["residual_sup"] = sol.residual_sup;
    summary["c_drift"] = finite(sol.c_drift);
    summary["tol_c"] = finite(sol.tol_c);
    detail::write_json(out / "normalized_report.json", summary);
    detail::write_text(out / "newton.jsonl", report.records_jsonl());
    if (report.converged) write_field((out / "u.field").string(), sol.u);
    detail::print_time("normalized", report.wallclock);
    return report.converged ? kExitOk : kExitFailure;
}

inline int run_envelope(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    detail::check_eps(c.eps);
    const TorusGrid grid(c.n, c.N);
    const auto spec = detail::required_spec(c.h, "--h");
    const SolverConfig cfg = detail::resolved_solver(c);
    const MetricField omega = parse_metric(grid, c.metric);
    const ScalarField h = make_field(grid, spec);
    const auto start = std::chrono::steady_clock::now();
    const EnvelopeResult env = msh_envelope(h, omega, c.m, c.eps, cfg);
    detail::write_json(out / "envelope_report.json", env.report.to_json());
    if (!env.path.empty()) {
        write_field((out / "w.field").string(), env.w);
        const auto mask = contact_set(env.w, h, env.report.contact_tol);
        ScalarField m(grid);
        for (std::size_t p = 0; p < mask.size(); ++p) m[p] = mask[p];
        write_field((out / "contact.field").string(), m, "mask");
    }
    detail::print_time("envelope", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return env.report.converged ? kExitOk : kExitFailure;
}

/// Manufactured solutions: H := log σ_m(u*) − u* with the exact Hessian of u*,
/// solved on every N of the list; sup errors and observed orders.
inline int run_mms(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    const auto spec = detail::required_spec(c.u_star, "--u-star");
    const SolverConfig cfg = detail::resolved_solver(c);
    require(!c.grids.empty(), "--grids must not be empty");
    std::vector<TorusGrid> grids;
    for (int N : c.grids) grids.emplace_back(c.n, N);

    std::ostringstream csv;
    csv.precision(17);
    csv << "N,h,sup_error,final_residual,newton,converged\n";
    nlohmann::json rows = nlohmann::json::array();
    bool ok = true;
    double prev_err = 0.0;
    double prev_h = 0.0;
    for (const auto& grid : grids) {
        const MetricField omega = parse_metric(grid, c.metric);
        const ScalarField ustar = make_field(grid, spec);
        const ScalarField sig = sigma_m_exact(spec, omega, c.m);
        require(sig.min() > 0.0, "--u-star: σ_m(u*) is not positive; reduce the amplitude");
        ScalarField H(grid);
        for (std::size_t p = 0; p < H.size(); ++p) H[p] = std::log(sig[p]) - ustar[p];
        SolveReport report;
        const ScalarField u = solve_exponential(H, omega, c.m, cfg, report);
        const double err = (u - ustar).sup_norm();
        const double h = grid.spacing();
        csv << grid.N() << ',' << h << ',' << err << ',' << report.final_residual << ',' << report.total_newton() << ','
            << (report.converged ? 1 : 0) << '\n';
        nlohmann::json row = {{"N", grid.N()}, {"sup_error", err}, {"final_residual", report.final_residual},
                              {"converged", report.converged}};
        if (prev_err > 0.0 && err > 0.0) row["observed_order"] = std::log(prev_err / err) / std::log(prev_h / h);
        rows.push_back(row);
        prev_err = err;
        prev_h = h;
        ok = ok && report.converged;
        std::cout << "mms N=" << grid.N() << " sup_error " << err << " wallclock " << report.wallclock << " s\n";
    }
    detail::write_text(out / "mms.csv", csv.str());
    detail::write_json(out / "mms_report.json", {{"rows", rows}, {"converged", ok}});
    return ok ? kExitOk : kExitFailure;
}

inline int run_stability(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    detail::check_eps(c.eps);
    const TorusGrid grid(c.n, c.N);
    const auto fspec = detail::required_spec(c.f, "--f");
    const auto pspec = detail::required_spec(c.psi, "--psi");
    const SolverConfig cfg = detail::resolved_solver(c);
    const MetricField omega = parse_metric(grid, c.metric);
    const double p = c.p > 0.0 ? c.p : 2.0 * c.n / c.m;
    const double a = c.a > 0.0 ? c.a : 1.0 / (c.m + 2);
    const auto start = std::chrono::steady_clock::now();
    const auto sweep = stability_sweep(make_field(grid, fspec), make_field(grid, pspec), c.deltas, p, a, omega, c.m,
                                       c.eps, cfg, c.allow_any_exponent);
    detail::write_text(out / "stability.csv", sweep.csv());
    detail::write_json(out / "stability_summary.json",
                       {{"p", p}, {"a", a}, {"spread", sweep.spread()}, {"converged", sweep.converged}});
    detail::print_time("stability-sweep", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return sweep.converged ? kExitOk : kExitFailure;
}

/// φ is shifted so that sup φ = 0 before the sublevel table is formed.
inline int run_decay(const ExperimentConfig& c, const std::filesystem::path& out)
{
    detail::check_m(c);
    const TorusGrid grid(c.n, c.N);
    const auto spec = detail::required_spec(c.phi, "--phi");
    const MetricField omega = parse_metric(grid, c.metric);
    ScalarField phi = make_field(grid, spec);
    phi += -phi.max();
    const DecayTable table = sublevel_volume_decay(phi, c.t_list, &omega, c.m);
    detail::write_text(out / "decay.csv", table.csv());
    detail::write_json(out / "decay_summary.json", {{"reference", table.reference}, {"bounded", table.bounded}});
    return table.bounded ? kExitOk : kExitFailure;
}

inline void add_grid_options(CLI::App* sub, ExperimentConfig& c)
{
    sub->add_option("--n", c.n, "complex dimension (2 or 3)");
    sub->add_option("--N", c.N, "grid points per real axis (even, >= 8)");
    sub->add_option("--m", c.m, "Hessian degree, 1 <= m <= n");
    sub->add_option("--metric", c.metric, "flat | scale:s | diag:a,b[,c]");
}

inline void add_solver_options(CLI::App* sub, ExperimentConfig& c)
{
    sub->add_option("--newton-tol", c.solver.newton_tol, "sup-norm Newton tolerance");
    sub->add_option("--max-newton", c.solver.max_newton, "Newton iterations per continuity step");
    sub->add_option("--krylov-tol", c.solver.krylov_tol, "relative GMRES tolerance");
    sub->add_option("--t-steps", c.solver.t_steps, "initial number of continuity steps");
    sub->add_option("--restart", c.solver.restart, "GMRES restart length");
    sub->add_option("--preconditioner", c.preconditioner, "spectral | diagonal");
    sub->add_flag("--no-cone-guard", c.no_cone_guard, "accept Newton steps that leave the cone");
}

inline nlohmann::json config_echo(const std::string& command, const ExperimentConfig& c)
{
    nlohmann::json j = {{"command", command}, {"seed", c.seed}};
    if (command == "verify-cone") {
        j["n"] = c.n;
        j["m"] = c.m;
        j["samples"] = c.samples;
        j["tolerance"] = c.tolerance;
        return j;
    }
    j["grid"] = detail::grid_echo(c);
    if (command != "decay") {
        SolverConfig s = c.solver;
        s.preconditioner = c.preconditioner == "diagonal" ? Preconditioner::Diagonal : Preconditioner::Spectral;
        s.cone_guard = !c.no_cone_guard;
        j["solver"] = s.to_json();
    }
    if (command == "solve") j["H"] = c.H;
    if (command == "normalized") j["f"] = c.f;
    if (command == "envelope") j["h"] = c.h;
    if (command == "mms") {
        j["u_star"] = c.u_star;
        j["grids"] = c.grids;
    }
    if (command == "stability-sweep") {
        j["f"] = c.f;
        j["psi"] = c.psi;
        j["deltas"] = c.deltas;
        j["p"] = c.p > 0.0 ? c.p : 2.0 * c.n / c.m;
        j["a"] = c.a > 0.0 ? c.a : 1.0 / (c.m + 2);
        j["allow_any_exponent"] = c.allow_any_exponent;
    }
    if (command == "normalized" || command == "envelope" || command == "stability-sweep") j["eps"] = c.eps;
    if (command == "decay") {
        j["phi"] = c.phi;
        j["t"] = c.t_list;
    }
    return j;
}

inline constexpr const char* kFieldGrammar =
    "Field specs: terms 'kind:freq:amp' joined by ';' (or '+'), kind in {cos, sin, const};\n"
    "freq is a comma list over x1,y1,...,xn,yn (missing entries are 0); const takes an empty\n"
    "freq, e.g. \"const::1;cos:1,0,0,0:0.3\".";

inline int run(int argc, const char* const* argv)
{
    CLI::App app{"hessianlab: complex Hessian equations on flat tori"};
    app.footer(kFieldGrammar);
    app.set_help_flag("--help", "print this help and exit");
    app.set_config("--config", "", "TOML/INI file with option values; flags override it");
    app.require_subcommand(1);
    app.fallthrough();
    ExperimentConfig c;
    app.add_option("--out", c.out, "output directory");
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--threads", c.threads, "worker threads (HESSIANLAB_THREADS overrides; default all cores)");

    auto* verify = app.add_subcommand("verify-cone", "randomized check of the cone inequalities");
    verify->add_option("--n", c.n, "vector length");
    verify->add_option("--m", c.m, "cone index, 1 <= m < n");
    verify->add_option("--samples", c.samples, "cone points to draw");
    verify->add_option("--tol", c.tolerance, "relative slack tolerance");

    auto* solve = app.add_subcommand("solve", "log σ_m(u) = u + H");
    add_grid_options(solve, c);
    add_solver_options(solve, c);
    solve->add_option("--H", c.H, "right-hand side H (field spec)");

    auto* normalized = app.add_subcommand("normalized", "σ_m(u) = c f, sup u = 0");
    add_grid_options(normalized, c);
    add_solver_options(normalized, c);
    normalized->add_option("--f", c.f, "density f > 0 (field spec)");
    normalized->add_option("--eps", c.eps, "decreasing ε schedule")->delimiter(',');

    auto* envelope = app.add_subcommand("envelope", "(ω,m)-subharmonic envelope of an obstacle");
    add_grid_options(envelope, c);
    add_solver_options(envelope, c);
    envelope->add_option("--h", c.h, "obstacle h (field spec)");
    envelope->add_option("--eps", c.eps, "decreasing ε schedule")->delimiter(',');

    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    add_grid_options(mms, c);
    add_solver_options(mms, c);
    mms->add_option("--u-star", c.u_star, "manufactured solution u* (field spec)");
    mms->add_option("--grids", c.grids, "list of N")->delimiter(',');

    auto* stability = app.add_subcommand("stability-sweep", "‖u − v‖_∞ against ‖f − g‖_p^a");
    add_grid_options(stability, c);
    add_solver_options(stability, c);
    stability->add_option("--f", c.f, "density f > 0 (field spec)");
    stability->add_option("--psi", c.psi, "perturbation direction ψ, g = f(1 + δψ)");
    stability->add_option("--deltas", c.deltas, "perturbation sizes")->delimiter(',');
    stability->add_option("--p", c.p, "norm exponent (default 2n/m)");
    stability->add_option("--a", c.a, "stability exponent (default 1/(m+2))");
    stability->add_flag("--allow-any-exponent", c.allow_any_exponent, "diagnostic runs with a >= 1/(m+1)");
    stability->add_option("--eps", c.eps, "decreasing ε schedule")->delimiter(',');

    auto* decay = app.add_subcommand("decay", "volume of sublevel sets {φ < −t}");
    add_grid_options(decay, c);
    decay->add_option("--phi", c.phi, "φ (field spec); shifted to sup φ = 0");
    decay->add_option("--t", c.t_list, "levels t")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitInput;
    }

    if (c.threads > 0) set_thread_count(c.threads);
    configure_threads_from_env();

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        if (command != "verify-cone") {
            const TorusGrid probe_grid(c.n, c.N);
            (void)probe_grid;
            detail::check_m(c);
        }
        const std::filesystem::path out(c.out);
        std::filesystem::create_directories(out);
        detail::write_json(out / "config.json", config_echo(command, c));
        if (command == "verify-cone") return run_verify_cone(c, out);
        if (command == "solve") return run_solve(c, out);
        if (command == "normalized") return run_normalized(c, out);
        if (command == "envelope") return run_envelope(c, out);
        if (command == "mms") return run_mms(c, out);
        if (command == "stability-sweep") return run_stability(c, out);
        if (command == "decay") return run_decay(c, out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitInput;
}

} // namespace hessianlab::cli
