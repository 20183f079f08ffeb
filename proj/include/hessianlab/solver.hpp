#pragma once

// Damped Newton with a continuity path for
//   G(u) = log σ_m(u) − q u − g = 0,
// the common core of the exponential equation (q = 1, g = H), the normalized
// pair (q = ε, g = log f) and the penalized envelope (q = 1/ε).

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/krylov.hpp"
#include "hessianlab/operator.hpp"

namespace hessianlab {

struct SolverConfig {
    double newton_tol = 1e-9;     // sup-norm residual
    int max_newton = 50;
    double krylov_tol = 1e-10;    // relative
    int t_steps = 4;
    double damping = 0.5;
    double min_step = 1.0 / 1048576.0;  // 2^-20
    bool cone_guard = true;
    int restart = 30;
    Preconditioner preconditioner = Preconditioner::Spectral;
    double min_t_step = 1.0 / 4096.0;

    void validate() const
    {
        require(newton_tol > 0.0, "SolverConfig: newton_tol must be positive");
        require(krylov_tol > 0.0, "SolverConfig: krylov_tol must be positive");
        require(max_newton >= 1, "SolverConfig: max_newton must be >= 1");
        require(t_steps >= 1, "SolverConfig: t_steps must be >= 1");
        require(damping > 0.0 && damping < 1.0, "SolverConfig: damping must lie in (0,1)");
        require(min_step > 0.0 && min_step <= 1.0, "SolverConfig: min_step must lie in (0,1]");
        require(restart >= 1, "SolverConfig: restart must be >= 1");
        require(min_t_step > 0.0 && min_t_step <= 1.0, "SolverConfig: min_t_step must lie in (0,1]");
    }

    [[nodiscard]] nlohmann::json to_json() const
    {
        return {{"newton_tol", newton_tol},   {"max_newton", max_newton}, {"krylov_tol", krylov_tol},
                {"t_steps", t_steps},         {"damping", damping},       {"min_step", min_step},
                {"cone_guard", cone_guard},   {"restart", restart},
                {"preconditioner", preconditioner == Preconditioner::Spectral ? "spectral" : "diagonal"},
                {"min_t_step", min_t_step}};
    }
};

/// One Newton iteration. iter = 0 is the residual at the start of a path step.
struct NewtonRecord {
    double eps = std::numeric_limits<double>::quiet_NaN();
    double t = 0.0;
    int iter = 0;
    double residual_sup = 0.0;
    double step_scale = 0.0;
    double cone_margin = 0.0;
    int krylov_iterations = 0;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json j = {{"t", t},
                            {"iter", iter},
                            {"residual_sup", residual_sup},
                            {"step_scale", step_scale},
                            {"cone_margin", cone_margin},
                            {"krylov_iterations", krylov_iterations}};
        if (!std::isnan(eps)) j["eps"] = eps;
        return j;
    }
};

struct PathStep {
    double t = 0.0;
    int newton_iters = 0;
    double final_residual = 0.0;
    std::vector<double> residuals;  // residual before the first and after every iteration
};

struct SolveReport {
    bool converged = false;
    std::string message;
    std::vector<PathStep> t_path;
    std::vector<NewtonRecord> records;
    double cone_margin_min = std::numeric_limits<double>::infinity();
    double sup_u = 0.0;
    double inf_u = 0.0;
    double final_residual = std::numeric_limits<double>::infinity();
    int halvings = 0;
    double wallclock = 0.0;  // seconds; never serialized

    // Normalized solver only: c estimate after each ε.
    std::vector<double> eps_values;
    std::vector<double> c_estimates;

    [[nodiscard]] int total_newton() const
    {
        int total = 0;
        for (const auto& s : t_path) total += s.newton_iters;
        return total;
    }

    /// Newton residuals of the last continuity step.
    [[nodiscard]] const std::vector<double>& final_step_residuals() const
    {
        static const std::vector<double> empty;
        return t_path.empty() ? empty : t_path.back().residuals;
    }

    [[nodiscard]] std::string records_jsonl() const
    {
        std::ostringstream os;
        for (const auto& r : records) os << r.to_json().dump() << '\n';
        return os.str();
    }

    [[nodiscard]] nlohmann::json summary() const
    {
        nlohmann::json path = nlohmann::json::array();
        for (const auto& s : t_path) path.push_back({{"t", s.t}, {"newton_iters", s.newton_iters}, {"final_residual", s.final_residual}});
        nlohmann::json j = {{"converged", converged},
                            {"message", message},
                            {"t_path", path},
                            {"cone_margin_min", std::isfinite(cone_margin_min) ? nlohmann::json(cone_margin_min) : nlohmann::json()},
                            {"sup_u", sup_u},
                            {"inf_u", inf_u},
                            {"final_residual", std::isfinite(final_residual) ? nlohmann::json(final_residual) : nlohmann::json()},
                            {"newton_total", total_newton()},
                            {"t_halvings", halvings}};
        if (!c_estimates.empty()) {
            j["eps"] = eps_values;
            j["c_estimates"] = c_estimates;
        }
        return j;
    }
};

namespace detail {

struct ResidualEval {
    ScalarField residual;
    double sup = std::numeric_limits<double>::infinity();
    double margin = -std::numeric_limits<double>::infinity();
    bool admissible = false;
};

// G(u) = log σ_m(u) − q u − g. Inadmissible when σ_m <= 0 somewhere, or, with
// the guard on, when λ leaves Γ_m somewhere. The sup norm is divided by
// max(1, q), so for stiff penalties it measures the residual in units of u.
inline ResidualEval evaluate_residual(const ScalarField& u, const ScalarField& g, const MetricField& omega, int m,
                                      double q, bool cone_guard)
{
    const OperatorValue op = sigma_m(u, omega, m);
    ResidualEval out;
    out.margin = op.margin_min();
    const double sigma_min = op.sigma.min();
    if (!(sigma_min > 0.0) || (cone_guard && !op.all_in_cone())) return out;
    out.residual = ScalarField(u.grid());
    parallel_for(u.size(), [&](std::size_t p) { out.residual[p] = std::log(op.sigma[p]) - q * u[p] - g[p]; });
    out.sup = out.residual.sup_norm() / std::max(1.0, q);
    out.admissible = std::isfinite(out.sup);
    return out;
}

struct NewtonOutcome {
    bool converged = false;
    std::string message;
};

// Newton from u (updated in place) for fixed (q, g); appends to report.
inline NewtonOutcome newton(ScalarField& u, const ScalarField& g, const MetricField& omega, int m, double q,
                            const SolverConfig& cfg, double t, double eps, SolveReport& report, PathStep& step)
{
    ResidualEval cur = evaluate_residual(u, g, omega, m, q, cfg.cone_guard);
    if (!cur.admissible) return {false, "starting point outside the cone"};
    step.residuals.push_back(cur.sup);
    report.records.push_back({eps, t, 0, cur.sup, 0.0, cur.margin, 0});

    KrylovOptions kopt;
    kopt.tol = cfg.krylov_tol;
    kopt.restart = cfg.restart;
    kopt.preconditioner = cfg.preconditioner;

    for (int it = 1; cur.sup > cfg.newton_tol; ++it) {
        if (it > cfg.max_newton) return {false, "Newton iteration cap reached"};
        KrylovResult lin;
        try {
            const LinearizationField L = linearization(u, omega, m, q);
            lin = krylov_solve(L, -1.0 * cur.residual, kopt);
        } catch (const LinearSolveError& e) {
            return {false, e.what()};
        } catch (const ConeBreachError& e) {
            return {false, e.what()};
        }

        double scale = 1.0;
        bool accepted = false;
        ResidualEval trial;
        ScalarField candidate(u.grid());
        while (scale >= cfg.min_step) {
            parallel_for(u.size(), [&](std::size_t p) { candidate[p] = u[p] + scale * lin.solution[p]; });
            trial = evaluate_residual(candidate, g, omega, m, q, cfg.cone_guard);
            if (trial.admissible && (trial.sup <= (1.0 - 1e-4 * scale) * cur.sup || trial.sup <= cfg.newton_tol)) {
                accepted = true;
                break;
            }
            scale *= cfg.damping;
        }
        if (!accepted) return {false, "line search failed below the minimum step"};
        u = std::move(candidate);
        cur = std::move(trial);
        ++step.newton_iters;
        step.residuals.push_back(cur.sup);
        report.records.push_back({eps, t, it, cur.sup, scale, cur.margin, lin.iterations});
        report.cone_margin_min = std::min(report.cone_margin_min, cur.margin);
    }
    report.cone_margin_min = std::min(report.cone_margin_min, cur.margin);
    step.final_residual = cur.sup;
    report.final_residual = cur.sup;
    return {true, {}};
}

} // namespace detail

/// Follows g_t = g_start + t (g_target − g_start), t: 0 → 1, where u_start solves
/// the t = 0 problem exactly when g_start = log σ_m(u_start) − q u_start. The step
/// in t starts at 1/t_steps and is halved whenever Newton fails.
[[nodiscard]] inline ScalarField continuation_solve(const ScalarField& u_start, const ScalarField& g_start,
                                                    const ScalarField& g_target, const MetricField& omega, int m,
                                                    double q, const SolverConfig& cfg, SolveReport& report,
                                                    double eps = std::numeric_limits<double>::quiet_NaN())
{
    cfg.validate();
    require(u_start.grid() == omega.grid() && g_start.grid() == omega.grid() && g_target.grid() == omega.grid(),
            "continuation_solve: grid mismatch");
    ScalarField u = u_start;
    ScalarField g(u.grid());
    double t = 0.0;
    double dt = 1.0 / cfg.t_steps;
    while (t < 1.0) {
        const double t_next = std::min(1.0, t + dt);
        parallel_for(g.size(), [&](std::size_t p) { g[p] = g_start[p] + t_next * (g_target[p] - g_start[p]); });
        ScalarField trial = u;
        PathStep step;
        step.t = t_next;
        const std::size_t mark = report.records.size();
        const auto outcome = detail::newton(trial, g, omega, m, q, cfg, t_next, eps, report, step);
        if (outcome.converged) {
            u = std::move(trial);
            t = t_next;
            report.t_path.push_back(std::move(step));
            continue;
        }
        report.records.resize(mark);
        dt *= 0.5;
        ++report.halvings;
        if (dt < cfg.min_t_step) {
            report.converged = false;
            report.message = "continuation stalled at t = " + std::to_string(t) + ": " + outcome.message;
            report.sup_u = u.max();
            report.inf_u = u.min();
            return u;
        }
    }
    report.converged = true;
    report.sup_u = u.max();
    report.inf_u = u.min();
    return u;
}

/// log σ_m(u) = u + H along log σ_m(u_t) = u_t + t H from u_0 ≡ 0.
[[nodiscard]] inline ScalarField solve_exponential(const ScalarField& H, const MetricField& omega, int m,
                                                   const SolverConfig& cfg, SolveReport& report)
{
    require(H.grid() == omega.grid(), "solve_exponential: grid mismatch");
    const auto start = std::chrono::steady_clock::now();
    const ScalarField zero(H.grid());
    ScalarField g0(H.grid());
    const OperatorValue op = sigma_m(zero, omega, m);
    parallel_for(g0.size(), [&](std::size_t p) { g0[p] = std::log(op.sigma[p]); });
    ScalarField u = continuation_solve(zero, g0, H, omega, m, 1.0, cfg, report);
    report.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return u;
}

struct NormalizedSolution {
    ScalarField u;
    double c = 0.0;
    double residual_sup = 0.0;  // sup |σ_m(u) − c f|
    double c_drift = std::numeric_limits<double>::quiet_NaN();  // |c_last − c_previous|
    // c_drift extrapolated linearly in ε to ε = 0: c_drift · ε_prev / (ε_prev − ε_last).
    double tol_c = std::numeric_limits<double>::quiet_NaN();
};

/// σ_m(u) = c f with sup u = 0, through log σ_m(v) = ε v + log f along the
/// decreasing schedule; c = e^{ε sup v} and u = v − sup v at the last ε.
[[nodiscard]] inline NormalizedSolution solve_normalized(const ScalarField& f, const MetricField& omega, int m,
                                                         const std::vector<double>& eps_schedule,
                                                         const SolverConfig& cfg, SolveReport& report)
{
    require(f.grid() == omega.grid(), "solve_normalized: grid mismatch");
    require(!eps_schedule.empty(), "solve_normalized: empty ε schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        require(eps_schedule[i] > 0.0, "solve_normalized: ε values must be positive");
        require(i == 0 || eps_schedule[i] < eps_schedule[i - 1], "solve_normalized: ε schedule must decrease");
    }
    const double fmax = f.max();
    const double fmin = f.min();
    require(std::isfinite(fmax) && fmax > 0.0 && fmin >= 1e-6 * fmax,
            "solve_normalized: f must be strictly positive (min f >= 1e-6 max f)");

    const auto start = std::chrono::steady_clock::now();
    const TorusGrid& grid = f.grid();
    ScalarField log_f(grid);
    parallel_for(f.size(), [&](std::size_t p) { log_f[p] = std::log(f[p]); });

    ScalarField v(grid);
    double prev_eps = 0.0;
    NormalizedSolution out;
    for (double eps : eps_schedule) {
        ScalarField v_start(grid);
        if (prev_eps > 0.0) {
            const double s = v.max();
            const double shift = prev_eps * s / eps;
            parallel_for(v.size(), [&](std::size_t p) { v_start[p] = v[p] - s + shift; });
        }
        const OperatorValue op = sigma_m(v_start, omega, m);
        ScalarField g0(grid);
        parallel_for(g0.size(), [&](std::size_t p) { g0[p] = std::log(op.sigma[p]) - eps * v_start[p]; });
        v = continuation_solve(v_start, g0, log_f, omega, m, eps, cfg, report, eps);
        if (!report.converged) {
            report.message = "ε = " + std::to_string(eps) + ": " + report.message;
            break;
        }
        const double c = std::exp(eps * v.max());
        report.eps_values.push_back(eps);
        report.c_estimates.push_back(c);
        prev_eps = eps;
    }

    if (!report.eps_values.empty()) {
        const double sup_v = v.max();
        out.c = report.c_estimates.back();
        out.u = v;
        out.u += -sup_v;
        const OperatorValue op = sigma_m(out.u, omega, m);
        out.residual_sup = parallel_max(f.size(), [&](std::size_t p) { return std::abs(op.sigma[p] - out.c * f[p]); });
        if (report.c_estimates.size() >= 2)
        {
            const std::size_t k = report.c_estimates.size();
            out.c_drift = std::abs(report.c_estimates[k - 1] - report.c_estimates[k - 2]);
            out.tol_c = out.c_drift * report.eps_values[k - 2] / (report.eps_values[k - 2] - report.eps_values[k - 1]);
        }
        report.sup_u = out.u.max();
        report.inf_u = out.u.min();
    }
    report.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace hessianlab
