#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hessianlab/inequalities.hpp"
#include "hessianlab/solver.hpp"

using namespace hessianlab;
using Catch::Matchers::WithinAbs;

namespace {

const char* const kStar = "cos:1,0,0,0:0.4;sin:0,1,1,0:0.3;cos:0,0,1,1:0.25";

ScalarField manufactured_H(const ScalarField& u_star, const MetricField& omega, int m)
{
    const ScalarField s = sigma_m(u_star, omega, m).sigma;
    ScalarField H(u_star.grid());
    for (std::size_t p = 0; p < H.size(); ++p) H[p] = std::log(s[p]) - u_star[p];
    return H;
}

} // namespace

TEST_CASE("solver configuration validation", "[solver]")
{
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    auto bad = [](auto mutate) {
        SolverConfig c;
        mutate(c);
        return c;
    };
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.newton_tol = 0.0; }).validate(), InputError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.krylov_tol = -1.0; }).validate(), InputError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_newton = 0; }).validate(), InputError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.t_steps = 0; }).validate(), InputError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.damping = 1.0; }).validate(), InputError);
    CHECK_THROWS_AS(bad([](SolverConfig& c) { c.min_step = 0.0; }).validate(), InputError);
    const auto j = cfg.to_json();
    CHECK(j["newton_tol"].get<double>() == 1e-9);
    CHECK(j["max_newton"].get<int>() == 50);
    CHECK(j["t_steps"].get<int>() == 4);
    CHECK(j["min_step"].get<double>() == std::ldexp(1.0, -20));
    CHECK(j["cone_guard"].get<bool>());
}

TEST_CASE("zero data needs no Newton iterations", "[solver]")
{
    const TorusGrid g(2, 8);
    SolveReport report;
    const ScalarField u = solve_exponential(ScalarField(g), MetricField::flat(g), 1, SolverConfig{}, report);
    CHECK(report.converged);
    CHECK(report.total_newton() == 0);
    CHECK(u.sup_norm() == 0.0);
    REQUIRE_FALSE(report.t_path.empty());
    CHECK(report.t_path.back().t == 1.0);
}

TEST_CASE("constant data gives the constant solution", "[solver]")
{
    for (int m : {1, 2}) {
        const TorusGrid g(2, 8);
        SolveReport report;
        const ScalarField u = solve_exponential(ScalarField(g, 0.3), MetricField::flat(g), m, SolverConfig{}, report);
        REQUIRE(report.converged);
        CHECK_THAT(u.min(), WithinAbs(-0.3, 1e-9));
        CHECK_THAT(u.max(), WithinAbs(-0.3, 1e-9));
        CHECK(report.final_residual <= 1e-9);
    }
}

TEST_CASE("manufactured solution is recovered", "[solver]")
{
    for (int m : {1, 2}) {
        const TorusGrid g(2, 16);
        const MetricField omega = MetricField::flat(g);
        const ScalarField u_star = make_field(g, FieldSpec::parse(kStar));
        REQUIRE(sigma_m(u_star, omega, m).all_in_cone());
        const ScalarField H = manufactured_H(u_star, omega, m);
        SolverConfig cfg;
        SolveReport report;
        const ScalarField u = solve_exponential(H, omega, m, cfg, report);
        REQUIRE(report.converged);
        CHECK(report.final_residual <= cfg.newton_tol);
        CHECK((u - u_star).sup_norm() <= 10 * cfg.newton_tol);
        CHECK(report.cone_margin_min > 0.0);

        const auto mp = check_max_principle(u, H, 10 * cfg.newton_tol);
        CHECK(mp.holds);

        // Newton residuals on the last continuation step fall quadratically once small.
        const auto& r = report.final_step_residuals();
        REQUIRE(r.size() >= 2);
        for (std::size_t k = 1; k < r.size(); ++k)
            if (r[k - 1] < 1e-3 && r[k] > 1e-13) CHECK(r[k] <= 10.0 * r[k - 1] * r[k - 1]);

        std::istringstream lines(report.records_jsonl());
        std::string line;
        std::size_t count = 0;
        while (std::getline(lines, line)) {
            const auto rec = nlohmann::json::parse(line);
            CHECK(rec.contains("residual_sup"));
            CHECK(rec.contains("step_scale"));
            CHECK(rec.contains("cone_margin"));
            CHECK_FALSE(rec.contains("eps"));
            ++count;
        }
        CHECK(count == report.records.size());
        CHECK_FALSE(report.summary().contains("wallclock"));
    }
}

TEST_CASE("three-dimensional manufactured solve", "[solver]")
{
    const TorusGrid g(3, 8);
    const MetricField omega = MetricField::flat(g);
    const ScalarField u_star = make_field(g, FieldSpec::parse("cos:1,0,0,0:0.4;sin:0,1,1,0:0.3;cos:0,0,0,0,1,1:0.25"));
    const ScalarField H = manufactured_H(u_star, omega, 2);
    SolveReport report;
    const ScalarField u = solve_exponential(H, omega, 2, SolverConfig{}, report);
    REQUIRE(report.converged);
    CHECK((u - u_star).sup_norm() <= 1e-8);
}

TEST_CASE("solutions respect the maximum principle and comparison", "[solver]")
{
    const TorusGrid g(2, 16);
    const MetricField omega = MetricField::flat(g);
    const ScalarField H1 = make_field(g, FieldSpec::parse("cos:1,0,0,0:0.5;sin:0,1,0,1:0.3"));
    const ScalarField H2 = H1 + make_field(g, FieldSpec::parse("const::0.1;cos:0,0,1,0:0.1"));
    for (int m : {1, 2}) {
        SolverConfig cfg;
        SolveReport r1;
        SolveReport r2;
        const ScalarField u1 = solve_exponential(H1, omega, m, cfg, r1);
        const ScalarField u2 = solve_exponential(H2, omega, m, cfg, r2);
        REQUIRE(r1.converged);
        REQUIRE(r2.converged);
        CHECK(check_max_principle(u1, H1, 10 * cfg.newton_tol).holds);
        CHECK(check_max_principle(u2, H2, 10 * cfg.newton_tol).holds);
        for (std::size_t p = 0; p < u1.size(); ++p) CHECK(u1[p] >= u2[p] - 10 * cfg.newton_tol);
        CHECK(r1.sup_u == u1.max());
        CHECK(r1.inf_u == u1.min());
    }
}

TEST_CASE("diagonal preconditioner gives the same solution", "[solver]")
{
    const TorusGrid g(2, 8);
    const MetricField omega = MetricField::flat(g);
    const ScalarField H = make_field(g, FieldSpec::parse("cos:1,0,0,0:0.5;sin:0,1,0,1:0.3"));
    SolverConfig a;
    SolverConfig b;
    b.preconditioner = Preconditioner::Diagonal;
    SolveReport ra;
    SolveReport rb;
    const ScalarField ua = solve_exponential(H, omega, 2, a, ra);
    const ScalarField ub = solve_exponential(H, omega, 2, b, rb);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    CHECK((ua - ub).sup_norm() <= 1e-8);
}

TEST_CASE("unreachable data ends in a failure report", "[solver]")
{
    const TorusGrid g(2, 8);
    SolverConfig cfg;
    cfg.max_newton = 1;
    cfg.min_t_step = 0.25;
    SolveReport report;
    const ScalarField H = make_field(g, FieldSpec::parse("cos:1,0,0,0:3;sin:0,1,1,0:3"));
    (void)solve_exponential(H, MetricField::flat(g), 2, cfg, report);
    CHECK_FALSE(report.converged);
    CHECK_FALSE(report.message.empty());
    CHECK(report.halvings >= 1);
}

TEST_CASE("normalized equation with constant densities", "[solver]")
{
    const TorusGrid g(2, 8);
    const MetricField omega = MetricField::flat(g);
    const std::vector<double> eps{1, 0.3, 0.1, 0.03, 0.01};
    for (double level : {1.0, 2.0}) {
        SolveReport report;
        const auto sol = solve_normalized(ScalarField(g, level), omega, 2, eps, SolverConfig{}, report);
        REQUIRE(report.converged);
        CHECK(sol.u.sup_norm() <= 1e-9);
        CHECK_THAT(sol.c, WithinAbs(1.0 / level, 1e-9));
        CHECK(sol.u.max() == 0.0);
        CHECK(report.c_estimates.size() == eps.size());
    }
}

TEST_CASE("normalized equation recovers a manufactured density", "[solver]")
{
    const TorusGrid g(2, 16);
    const MetricField omega = MetricField::flat(g);
    const ScalarField u_star = make_field(g, FieldSpec::parse(kStar));
    const ScalarField s = sigma_m(u_star, omega, 2).sigma;
    const double top = s.max();
    const ScalarField f = (1.0 / top) * s;
    const std::vector<double> eps{1, 0.3, 0.1, 0.03, 0.01};
    SolveReport report;
    const auto sol = solve_normalized(f, omega, 2, eps, SolverConfig{}, report);
    REQUIRE(report.converged);
    CHECK(sol.u.max() == 0.0);
    ScalarField shifted = u_star;
    shifted += -u_star.max();
    CHECK((sol.u - shifted).sup_norm() <= 10.0 * eps.back());
    CHECK(std::abs(sol.c - top) <= 10.0 * eps.back() * top);
    CHECK(sol.residual_sup <= sol.tol_c);

    // Successive gaps between c estimates shrink.
    const auto& c = report.c_estimates;
    for (std::size_t k = 2; k < c.size(); ++k) CHECK(std::abs(c[k] - c[k - 1]) < std::abs(c[k - 1] - c[k - 2]));
    const auto js = report.summary();
    CHECK(js["c_estimates"].size() == eps.size());
    for (const auto& rec : report.records) CHECK_FALSE(std::isnan(rec.eps));
}

TEST_CASE("normalized equation rejects bad input", "[solver]")
{
    const TorusGrid g(2, 8);
    const MetricField omega = MetricField::flat(g);
    SolveReport report;
    const ScalarField bumpy = make_field(g, FieldSpec::parse("cos:1:1"));
    CHECK_THROWS_AS(solve_normalized(bumpy, omega, 1, {1, 0.1}, SolverConfig{}, report), InputError);
    CHECK_THROWS_AS(solve_normalized(ScalarField(g, 0.0), omega, 1, {1, 0.1}, SolverConfig{}, report), InputError);
    CHECK_THROWS_AS(solve_normalized(ScalarField(g, 1.0), omega, 1, {0.1, 1}, SolverConfig{}, report), InputError);
    CHECK_THROWS_AS(solve_normalized(ScalarField(g, 1.0), omega, 1, {1, -0.1}, SolverConfig{}, report), InputError);
    CHECK_THROWS_AS(solve_normalized(ScalarField(g, 1.0), omega, 1, {}, SolverConfig{}, report), InputError);
}
