#include <catch_amalgamated.hpp>

#include <cmath>

#include "hessianlab/inequalities.hpp"

using namespace hessianlab;
using Catch::Matchers::WithinAbs;

TEST_CASE("maximum principle check", "[inequalities]")
{
    const TorusGrid g(2, 8);
    const auto exact = check_max_principle(ScalarField(g, -0.7), ScalarField(g, 0.7), 0.0);
    CHECK(exact.holds);
    CHECK(exact.upper_margin == 0.0);
    CHECK(exact.lower_margin == 0.0);

    const ScalarField H = make_field(g, FieldSpec::parse("cos:1,0,0,0:0.5;sin:0,1,1,0:0.2"));
    SolveReport report;
    const ScalarField u = solve_exponential(H, MetricField::flat(g), 2, SolverConfig{}, report);
    REQUIRE(report.converged);
    CHECK(check_max_principle(u, H, 1e-8).holds);

    const auto broken = check_max_principle(ScalarField(g, 1.0), ScalarField(g), 1e-8);
    CHECK_FALSE(broken.holds);
    CHECK(broken.upper_margin == -1.0);
}

TEST_CASE("discrete Lp norm", "[inequalities]")
{
    const TorusGrid g(2, 8);
    const double vol = std::pow(kTwoPi, 4);
    CHECK_THAT(lp_norm(ScalarField(g, 2.0), 3.0), WithinAbs(2.0 * std::pow(vol, 1.0 / 3.0), 1e-9));
    // ∫cos² over the torus = vol/2, exact for the trapezoid rule at this frequency.
    CHECK_THAT(lp_norm(make_field(g, FieldSpec::parse("cos:1:1")), 2.0), WithinAbs(std::sqrt(vol / 2), 1e-9));
    CHECK_THROWS_AS(lp_norm(ScalarField(g), 0.5), InputError);
}

TEST_CASE("sublevel volume decay", "[inequalities]")
{
    const TorusGrid g(2, 16);
    const std::vector<double> ts{0.05, 0.1, 0.2, 0.5, 1, 1.5, 2, 3};
    const auto zero = sublevel_volume_decay(ScalarField(g), ts);
    for (const auto& r : zero.rows) CHECK(r.fraction == 0.0);

    ScalarField phi = make_field(g, FieldSpec::parse("cos:1:1"));
    phi += -1.0;
    const auto table = sublevel_volume_decay(phi, ts, nullptr);
    REQUIRE(table.rows.size() == ts.size());
    for (const auto& r : table.rows) {
        if (r.t == 1.0) CHECK(std::abs(r.fraction - 0.5) <= g.spacing());
        if (r.t >= 2.0) CHECK(r.fraction == 0.0);
        CHECK(r.t_fraction == r.t * r.fraction);
    }
    CHECK(table.bounded);
    CHECK(table.csv().rfind("t,fraction,t_fraction\n", 0) == 0);

    const MetricField flat = MetricField::flat(g);
    CHECK_NOTHROW(sublevel_volume_decay(phi, ts, &flat, 1));
    ScalarField steep = make_field(g, FieldSpec::parse("cos:1:9"));
    steep += -9.0;
    CHECK_THROWS_AS(sublevel_volume_decay(steep, ts, &flat, 1), InputError);
    CHECK_THROWS_AS(sublevel_volume_decay(make_field(g, FieldSpec::parse("cos:1:1")), ts), InputError);
    CHECK_THROWS_AS(sublevel_volume_decay(phi, {}), InputError);
    CHECK_THROWS_AS(sublevel_volume_decay(phi, {0.0, 1.0}), InputError);
}

TEST_CASE("Laplacian to gradient ratio", "[inequalities]")
{
    const TorusGrid g(2, 16);
    const double h = g.spacing();
    CHECK(laplacian_gradient_ratio(ScalarField(g)) == 0.0);
    const double r = laplacian_gradient_ratio(make_field(g, FieldSpec::parse("cos:1:1")));
    CHECK(std::abs(r - 0.125) <= h * h);
    const double r_small = laplacian_gradient_ratio(make_field(g, FieldSpec::parse("cos:1:0.1")));
    const double r_double = laplacian_gradient_ratio(make_field(g, FieldSpec::parse("cos:1:0.2")));
    CHECK(r_double > 1.9 * r_small);
    CHECK(r_double < 2.0 * r_small);
}

TEST_CASE("stability sweep", "[inequalities]")
{
    const TorusGrid g(2, 8);
    const MetricField omega = MetricField::flat(g);
    const ScalarField f = make_field(g, FieldSpec::parse("const::1;cos:1,0,0,0:0.3"));
    const ScalarField psi = make_field(g, FieldSpec::parse("sin:0,1,1,0:1"));
    const std::vector<double> eps{1, 0.3, 0.1};
    const int m = 1;
    const double p = 4.0;
    const double a = 1.0 / 3.0 - 0.05;
    const auto sweep = stability_sweep(f, psi, {0.0, 1e-1, 1e-2}, p, a, omega, m, eps, SolverConfig{});
    REQUIRE(sweep.converged);
    REQUIRE(sweep.records.size() == 3);
    CHECK(sweep.records[0].lhs == 0.0);
    CHECK(sweep.records[0].ratio == 0.0);
    for (std::size_t i = 1; i < 3; ++i) {
        const auto& r = sweep.records[i];
        CHECK(r.lhs > 0.0);
        CHECK(r.rhs > 0.0);
        CHECK(r.ratio == r.lhs / r.rhs);
    }
    CHECK(sweep.spread() >= 1.0);
    CHECK(sweep.csv().rfind("delta,p,a,lhs,rhs,ratio,c_f,c_g,converged\n", 0) == 0);

    CHECK_THROWS_AS(stability_sweep(f, psi, {1e-1}, 2.0, a, omega, m, eps, SolverConfig{}), InputError);
    CHECK_THROWS_AS(stability_sweep(f, psi, {1e-1}, p, 0.5, omega, m, eps, SolverConfig{}), InputError);
    CHECK_NOTHROW(stability_sweep(f, psi, {}, p, 0.5, omega, m, eps, SolverConfig{}, true));
    CHECK_THROWS_AS(stability_sweep(f, psi, {2.0}, p, a, omega, m, eps, SolverConfig{}), InputError);
    CHECK_THROWS_AS(stability_sweep(ScalarField(g, -1.0), psi, {1e-1}, p, a, omega, m, eps, SolverConfig{}), InputError);
}

TEST_CASE("larger densities give smaller auxiliary solutions", "[inequalities]")
{
    // At fixed ε, log σ(v) = εv + log f: f <= g forces v_f >= v_g.
    const TorusGrid g(2, 8);
    const MetricField omega = MetricField::flat(g);
    const ScalarField f = make_field(g, FieldSpec::parse("const::1;cos:1,0,0,0:0.3"));
    const ScalarField gg = f + make_field(g, FieldSpec::parse("const::0.2;sin:0,1,1,0:0.1"));
    const std::vector<double> eps{1, 0.3};
    SolveReport rf;
    SolveReport rg;
    const auto sf = solve_normalized(f, omega, 2, eps, SolverConfig{}, rf);
    const auto sg = solve_normalized(gg, omega, 2, eps, SolverConfig{}, rg);
    REQUIRE(rf.converged);
    REQUIRE(rg.converged);
    const double shift_f = std::log(sf.c) / eps.back();
    const double shift_g = std::log(sg.c) / eps.back();
    for (std::size_t p = 0; p < f.size(); ++p) CHECK(sf.u[p] + shift_f >= sg.u[p] + shift_g - 1e-8);
}
