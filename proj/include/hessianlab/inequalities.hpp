#pragma once

// Experiment drivers checking analytic estimates on solver output.

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/hermlin.hpp"
#include "hessianlab/operator.hpp"
#include "hessianlab/solver.hpp"

namespace hessianlab {

struct MaxPrincipleCheck {
    bool holds = false;
    double upper_margin = 0.0;  // −inf H − sup u
    double lower_margin = 0.0;  // inf u + sup H
};

/// sup u <= −inf H + tol and inf u >= −sup H − tol.
[[nodiscard]] inline MaxPrincipleCheck check_max_principle(const ScalarField& u, const ScalarField& H, double tol)
{
    require(u.grid() == H.grid(), "check_max_principle: grid mismatch");
    MaxPrincipleCheck out;
    out.upper_margin = -H.min() - u.max();
    out.lower_margin = u.min() + H.max();
    out.holds = out.upper_margin >= -tol && out.lower_margin >= -tol;
    return out;
}

/// (Σ |x|^p h^{2n})^{1/p}
[[nodiscard]] inline double lp_norm(const ScalarField& x, double p)
{
    require(p >= 1.0, "lp_norm: need p >= 1");
    const double s = deterministic_sum(x.size(), [&](std::size_t i) { return std::pow(std::abs(x[i]), p); });
    return std::pow(s * x.grid().cell_volume(), 1.0 / p);
}

struct StabilityRecord {
    double delta = 0.0;
    double p = 0.0;
    double a = 0.0;
    double lhs = 0.0;    // ‖u − v‖_∞
    double rhs = 0.0;    // ‖f − g‖_p^a
    double ratio = 0.0;
    double c_f = 0.0;
    double c_g = 0.0;
    bool converged = false;
};

struct StabilitySweep {
    std::vector<StabilityRecord> records;
    bool converged = false;

    /// max ratio / min positive ratio over converged records with δ > 0.
    [[nodiscard]] double spread() const
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& r : records) {
            if (!r.converged || r.ratio <= 0.0) continue;
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
        return hi > 0.0 ? hi / lo : 0.0;
    }

    [[nodiscard]] std::string csv() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "delta,p,a,lhs,rhs,ratio,c_f,c_g,converged\n";
        for (const auto& r : records)
            os << r.delta << ',' << r.p << ',' << r.a << ',' << r.lhs << ',' << r.rhs << ',' << r.ratio << ',' << r.c_f
               << ',' << r.c_g << ',' << (r.converged ? 1 : 0) << '\n';
        return os.str();
    }
};

/// For each δ solves σ_m(u) = c f and σ_m(v) = c' g, g = f(1 + δψ), both with
/// sup = 0, and records ‖u − v‖_∞ / ‖f − g‖_p^a. With allow_any_exponent the
/// range check on a is skipped (diagnostic runs with a >= 1/(m+1)).
[[nodiscard]] inline StabilitySweep stability_sweep(const ScalarField& f, const ScalarField& psi,
                                                    const std::vector<double>& deltas, double p, double a,
                                                    const MetricField& omega, int m,
                                                    const std::vector<double>& eps_schedule, const SolverConfig& cfg,
                                                    bool allow_any_exponent = false)
{
    const TorusGrid& grid = f.grid();
    require(psi.grid() == grid && omega.grid() == grid, "stability_sweep: grid mismatch");
    require(p > static_cast<double>(grid.n()) / m, "stability_sweep: need p > n/m");
    require(a > 0.0, "stability_sweep: need a > 0");
    require(allow_any_exponent || a < 1.0 / (m + 1), "stability_sweep: need a < 1/(m+1)");
    require(f.min() > 0.0, "stability_sweep: f must be positive");

    std::vector<ScalarField> perturbed;
    for (double delta : deltas) {
        ScalarField g(grid);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = f[i] * (1.0 + delta * psi[i]);
        require(g.min() > 0.0, "stability_sweep: perturbed density f(1 + δψ) is not positive");
        perturbed.push_back(std::move(g));
    }

    StabilitySweep out;
    SolveReport base_report;
    const NormalizedSolution base = solve_normalized(f, omega, m, eps_schedule, cfg, base_report);
    out.converged = base_report.converged;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        StabilityRecord rec;
        rec.delta = deltas[i];
        rec.p = p;
        rec.a = a;
        rec.c_f = base.c;
        if (!base_report.converged) {
            out.records.push_back(rec);
            continue;
        }
        if (deltas[i] == 0.0) {
            rec.c_g = base.c;
            rec.converged = true;
            out.records.push_back(rec);
            continue;
        }
        SolveReport report;
        const NormalizedSolution pert = solve_normalized(perturbed[i], omega, m, eps_schedule, cfg, report);
        rec.converged = report.converged;
        out.converged = out.converged && report.converged;
        if (report.converged) {
            rec.c_g = pert.c;
            rec.lhs = (base.u - pert.u).sup_norm();
            rec.rhs = std::pow(lp_norm(f - perturbed[i], p), a);
            rec.ratio = rec.rhs > 0.0 ? rec.lhs / rec.rhs : 0.0;
        }
        out.records.push_back(rec);
    }
    return out;
}

struct DecayRow {
    double t = 0.0;
    double fraction = 0.0;
    double t_fraction = 0.0;
};

struct DecayTable {
    std::vector<DecayRow> rows;
    double reference = 0.0;  // max t·fraction over t ∈ [t_min, 1]
    bool bounded = false;    // every t·fraction <= 10 · reference

    [[nodiscard]] std::string csv() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "t,fraction,t_fraction\n";
        for (const auto& r : rows) os << r.t << ',' << r.fraction << ',' << r.t_fraction << '\n';
        return os.str();
    }
};

/// Grid-measure fraction of {φ < −t} for each t. φ must satisfy sup φ = 0;
/// when a metric is given, ω + dd^c φ must also lie in the closed Γ_m.
[[nodiscard]] inline DecayTable sublevel_volume_decay(const ScalarField& phi, std::vector<double> t_list,
                                                      const MetricField* omega = nullptr, int m = 0,
                                                      double tol = 1e-9)
{
    require(!t_list.empty(), "sublevel_volume_decay: empty t list");
    require(std::abs(phi.max()) <= tol, "sublevel_volume_decay: φ must be normalized with sup φ = 0");
    for (double t : t_list) require(t > 0.0, "sublevel_volume_decay: t values must be positive");
    if (omega) {
        const OperatorValue op = sigma_m(phi, *omega, m);
        require(op.margin_min() >= -tol, "sublevel_volume_decay: φ is not (ω,m)-subharmonic on the grid");
    }
    std::sort(t_list.begin(), t_list.end());
    DecayTable out;
    for (double t : t_list) {
        std::size_t below = 0;
        for (std::size_t p = 0; p < phi.size(); ++p) below += phi[p] < -t ? 1 : 0;
        const double fraction = static_cast<double>(below) / static_cast<double>(phi.size());
        out.rows.push_back({t, fraction, t * fraction});
    }
    const double t_min = out.rows.front().t;
    for (const auto& r : out.rows)
        if (r.t <= std::max(1.0, t_min)) out.reference = std::max(out.reference, r.t_fraction);
    out.bounded = true;
    for (const auto& r : out.rows) out.bounded = out.bounded && r.t_fraction <= 10.0 * out.reference;
    return out;
}

/// sup|∂∂̄u| / (1 + sup|∇u|²), sup|∂∂̄u| the largest spectral radius of dd^c u.
[[nodiscard]] inline double laplacian_gradient_ratio(const ScalarField& u)
{
    const HessianField hess = complex_hessian(u);
    const double top = parallel_max(u.size(), [&](std::size_t p) {
        const Spectrum s = eigenvalues_hermitian(hess.at(p));
        double r = 0.0;
        for (double x : s.eigenvalues()) r = std::max(r, std::abs(x));
        return r;
    });
    const double grad = gradient_sup(u);
    return top / (1.0 + grad * grad);
}

} // namespace hessianlab
