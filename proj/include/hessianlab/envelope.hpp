#pragma once

// Largest (ω,m)-subharmonic minorant of a smooth obstacle h as the ε → 0 limit of
//   log σ_m(w) = (w − h)/ε + log(F_* + ε),   F = σ_m(h) (raw), F_* = max(F, 0).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/operator.hpp"
#include "hessianlab/solver.hpp"

namespace hessianlab {

/// Points where h − w <= tol.
[[nodiscard]] inline std::vector<std::uint8_t> contact_set(const ScalarField& w, const ScalarField& h, double tol)
{
    require(w.grid() == h.grid(), "contact_set: grid mismatch");
    std::vector<std::uint8_t> mask(w.size());
    for (std::size_t p = 0; p < w.size(); ++p) mask[p] = h[p] - w[p] <= tol ? 1 : 0;
    return mask;
}

struct EnvelopeStep {
    double eps = 0.0;
    SolveReport solve;
    double obstacle_excess = 0.0;   // sup (w_ε − h)
    double complementarity = 0.0;   // sup min(σ_m(w_ε)_+, (h − w_ε)/scale)
    double distance = 0.0;          // ‖w_ε − h‖_∞
};

struct EnvelopeReport {
    std::vector<EnvelopeStep> eps_path;
    double monotone_violation_sup = 0.0;  // max over consecutive ε of sup (w_ε − w_ε'), ε' < ε, clipped at 0
    double contact_fraction = 0.0;
    double contact_tol = 0.0;
    double complementarity_sup = 0.0;     // at the final ε
    bool converged = false;
    double last_converged_eps = std::numeric_limits<double>::quiet_NaN();
    std::string message;

    [[nodiscard]] nlohmann::json to_json() const
    {
        nlohmann::json path = nlohmann::json::array();
        for (const auto& s : eps_path)
            path.push_back({{"eps", s.eps},
                            {"solve", s.solve.summary()},
                            {"obstacle_excess", s.obstacle_excess},
                            {"complementarity", s.complementarity},
                            {"distance", s.distance}});
        return {{"eps_path", path},
                {"monotone_violation_sup", monotone_violation_sup},
                {"contact_fraction", contact_fraction},
                {"contact_tol", contact_tol},
                {"complementarity_sup", complementarity_sup},
                {"converged", converged},
                {"last_converged_eps", std::isnan(last_converged_eps) ? nlohmann::json() : nlohmann::json(last_converged_eps)},
                {"message", message}};
    }
};

struct EnvelopeResult {
    ScalarField w;
    EnvelopeReport report;
    std::vector<ScalarField> path;  // w_ε for every converged ε
};

[[nodiscard]] inline double complementarity(const ScalarField& w, const ScalarField& h, const MetricField& omega, int m)
{
    const OperatorValue op = sigma_m(w, omega, m);
    const double scale = std::max(1.0, h.sup_norm());
    return parallel_max(w.size(), [&](std::size_t p) {
        return std::min(std::max(op.sigma[p], 0.0), (h[p] - w[p]) / scale);
    });
}

[[nodiscard]] inline EnvelopeResult msh_envelope(const ScalarField& h, const MetricField& omega, int m,
                                                 const std::vector<double>& eps_schedule, const SolverConfig& cfg)
{
    require(h.grid() == omega.grid(), "msh_envelope: grid mismatch");
    require(!eps_schedule.empty(), "msh_envelope: empty ε schedule");
    for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
        require(eps_schedule[i] > 0.0, "msh_envelope: ε values must be positive");
        require(i == 0 || eps_schedule[i] < eps_schedule[i - 1], "msh_envelope: ε schedule must decrease");
    }
    const TorusGrid& grid = h.grid();
    const ScalarField F = sigma_m(h, omega, m).sigma;

    EnvelopeResult out;
    ScalarField w(grid);
    for (double eps : eps_schedule) {
        const double q = 1.0 / eps;
        ScalarField g_target(grid);
        parallel_for(grid.points(), [&](std::size_t p) { g_target[p] = -h[p] / eps + std::log(std::max(F[p], 0.0) + eps); });
        const OperatorValue op = sigma_m(w, omega, m);
        ScalarField g0(grid);
        parallel_for(grid.points(), [&](std::size_t p) { g0[p] = std::log(op.sigma[p]) - q * w[p]; });

        EnvelopeStep step;
        step.eps = eps;
        ScalarField next = continuation_solve(w, g0, g_target, omega, m, q, cfg, step.solve, eps);
        if (!step.solve.converged) {
            out.report.message = "ε = " + std::to_string(eps) + ": " + step.solve.message;
            out.report.eps_path.push_back(std::move(step));
            break;
        }
        step.obstacle_excess = parallel_max(grid.points(), [&](std::size_t p) { return next[p] - h[p]; });
        step.distance = (next - h).sup_norm();
        step.complementarity = complementarity(next, h, omega, m);
        if (!out.path.empty()) {
            const ScalarField& prev = out.path.back();
            const double violation = parallel_max(grid.points(), [&](std::size_t p) { return prev[p] - next[p]; });
            out.report.monotone_violation_sup = std::max(out.report.monotone_violation_sup, violation);
        }
        out.report.eps_path.push_back(std::move(step));
        out.report.last_converged_eps = eps;
        out.path.push_back(next);
        w = std::move(next);
    }

    out.report.converged = out.path.size() == eps_schedule.size();
    if (!out.path.empty()) {
        out.w = out.path.back();
        out.report.contact_tol = out.report.last_converged_eps;
        const auto mask = contact_set(out.w, h, out.report.contact_tol);
        std::size_t touching = 0;
        for (auto b : mask) touching += b;
        out.report.contact_fraction = static_cast<double>(touching) / static_cast<double>(mask.size());
        out.report.complementarity_sup = out.report.eps_path[out.path.size() - 1].complementarity;
    }
    return out;
}

} // namespace hessianlab
