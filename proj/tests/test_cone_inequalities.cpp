#include <catch_amalgamated.hpp>

#include <cmath>
#include <utility>

#include "hessianlab/cone_inequalities.hpp"

using namespace hessianlab;

namespace {

const char* const kChecks[] = {"monotonicity",       "reduced_positivity",      "m_positive_entries",
                               "expansion_identity", "lower_bound_s_m_minus_1", "product_bound",
                               "theta_lower_bound",  "gradient_weighted_bound", "maclaurin"};

} // namespace

TEST_CASE("cone inequalities hold for n=3, m=2", "[cone]")
{
    const auto report = verify_cone_inequalities(3, 2, 100000, 7);
    CHECK(report.all_passed());
    CHECK(report.theta_hat > 0.0);
    CHECK(report.theta_hat >= report.theta_explicit);
    // θ for (3,2): 1/((3-2)^2 · C(3,2)) = 1/3
    CHECK(report.theta_explicit == Catch::Approx(1.0 / 3.0));
    for (const char* name : kChecks) {
        const auto& t = report.at(name);
        CHECK(t.pass == 100000);
        CHECK(t.fail == 0);
        CHECK(t.worst_slack >= -1e-10);
        CHECK(t.witness.size() == 3);
    }
    CHECK(report.draws >= report.samples);
}

TEST_CASE("cone inequalities on the half-space n=2, m=1", "[cone]")
{
    const auto report = verify_cone_inequalities(2, 1, 1000, 1);
    CHECK(report.all_passed());
    CHECK(report.theta_explicit == Catch::Approx(0.5));
    CHECK(report.theta_hat >= 0.5 - 1e-12);
}

TEST_CASE("cone inequalities n=6, m=3", "[cone]")
{
    const auto report = verify_cone_inequalities(6, 3, 20000, 21);
    CHECK(report.all_passed());
    CHECK(report.theta_hat > 0.0);
}

TEST_CASE("report is reproducible and serializes", "[cone]")
{
    const auto a = verify_cone_inequalities(4, 2, 2000, 99);
    const auto b = verify_cone_inequalities(4, 2, 2000, 99);
    CHECK(a.to_json().dump() == b.to_json().dump());
    const auto c = verify_cone_inequalities(4, 2, 2000, 100);
    CHECK(a.to_json().dump() != c.to_json().dump());

    const auto doc = a.to_json();
    for (const char* name : kChecks) {
        REQUIRE(doc.contains(name));
        CHECK(doc[name].contains("pass"));
        CHECK(doc[name].contains("fail"));
        CHECK(doc[name].contains("worst_slack"));
        CHECK(doc[name].contains("witness"));
    }
    CHECK(doc["_meta"]["all_passed"].get<bool>());
    CHECK(doc["_meta"]["n"].get<int>() == 4);
}

TEST_CASE("tally merge combines counts and keeps the worst witness", "[cone]")
{
    InequalityTally a;
    a.name = "x";
    InequalityTally b;
    b.name = "x";
    const std::vector<double> wa{1, 2};
    const std::vector<double> wb{3, 4};
    a.record(0.5, wa, 1e-10);
    a.record(-1.0, wa, 1e-10);
    b.record(-2.0, wb, 1e-10);
    InequalityTally ab = a;
    ab.merge(b);
    InequalityTally ba = b;
    ba.merge(a);
    CHECK(ab.pass == 1);
    CHECK(ab.fail == 2);
    CHECK(ab.worst_slack == -2.0);
    CHECK(ab.witness == wb);
    CHECK(ba.pass == ab.pass);
    CHECK(ba.fail == ab.fail);
    CHECK(ba.witness == ab.witness);
}

TEST_CASE("a violated inequality is reported with its witness", "[cone]")
{
    InequalityTally t;
    t.name = "probe";
    const std::vector<double> lam{3, 1, -1};
    t.record(-0.25, lam, 1e-10);
    CHECK(t.fail == 1);
    CHECK(t.witness == lam);
}

TEST_CASE("cone verification rejects bad arguments", "[cone]")
{
    CHECK_THROWS_AS(verify_cone_inequalities(3, 3, 10, 1), InputError);
    CHECK_THROWS_AS(verify_cone_inequalities(3, 0, 10, 1), InputError);
    CHECK_THROWS_AS(verify_cone_inequalities(3, 1, 0, 1), InputError);
}

TEST_CASE("theta estimate sits between the explicit bound and m/n", "[cone]")
{
    // At λ = (1,...,1) every weight equals C(n-1,m-1)/C(n,m) = m/n, and the
    // sampled minimum cannot exceed what nearby points attain.
    for (auto [n, m] : {std::pair{3, 2}, std::pair{4, 2}, std::pair{5, 3}}) {
        const auto report = verify_cone_inequalities(n, m, 5000, 17);
        CHECK(report.theta_hat >= report.theta_explicit);
        CHECK(report.theta_hat <= static_cast<double>(m) / n);
    }
}
