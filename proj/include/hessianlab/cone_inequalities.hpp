#pragma once

// Randomized verification of the pointwise inequalities satisfied by S_k on Γ_m.
// Every check compares two sides with the relative slack
//   (larger side - smaller side) / max(1, |lhs|, |rhs|)
// and counts a violation when that slack drops below -tolerance.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "hessianlab/error.hpp"
#include "hessianlab/symfunc.hpp"

namespace hessianlab {

struct InequalityTally {
    std::string name;
    long pass = 0;
    long fail = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
    std::vector<double> witness;  // λ (sorted) attaining worst_slack

    void record(double slack, std::span<const double> lambda, double tolerance)
    {
        if (slack >= -tolerance) ++pass;
        else ++fail;
        if (slack < worst_slack) {
            worst_slack = slack;
            witness.assign(lambda.begin(), lambda.end());
        }
    }

    void merge(const InequalityTally& other)
    {
        pass += other.pass;
        fail += other.fail;
        if (other.worst_slack < worst_slack) {
            worst_slack = other.worst_slack;
            witness = other.witness;
        }
    }
};

struct ConeInequalityReport {
    int n = 0;
    int m = 0;
    long samples = 0;
    long draws = 0;  // candidates drawn from [-1,3]^n, including rejected ones
    std::uint64_t seed = 0;
    double tolerance = 1e-10;
    double theta_hat = std::numeric_limits<double>::infinity();  // min λ_j S_{m-1;j}/S_m, j <= m
    double theta_explicit = 0.0;                                 // 1/((n-m)^m C(n,m))
    std::vector<InequalityTally> checks;

    [[nodiscard]] bool all_passed() const
    {
        for (const auto& c : checks)
            if (c.fail != 0) return false;
        return true;
    }

    [[nodiscard]] const InequalityTally& at(const std::string& name) const
    {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw InputError("ConeInequalityReport: no check named " + name);
    }

    [[nodiscard]] nlohmann::json to_json() const
    {
        auto finite_or_null = [](double x) -> nlohmann::json {
            if (std::isfinite(x)) return x;
            return nullptr;
        };
        nlohmann::json doc = nlohmann::json::object();
        for (const auto& c : checks) {
            doc[c.name] = {{"pass", c.pass},
                           {"fail", c.fail},
                           {"worst_slack", finite_or_null(c.worst_slack)},
                           {"witness", c.witness}};
        }
        doc["_meta"] = {{"n", n},
                        {"m", m},
                        {"samples", samples},
                        {"draws", draws},
                        {"seed", seed},
                        {"tolerance", tolerance},
                        {"theta_hat", finite_or_null(theta_hat)},
                        {"theta_explicit", theta_explicit},
                        {"all_passed", all_passed()}};
        return doc;
    }
};

namespace detail {

inline double relative_slack(double larger, double smaller)
{
    return (larger - smaller) / std::max({1.0, std::abs(larger), std::abs(smaller)});
}

inline void subsets_of_size(int n, int size, std::vector<std::vector<int>>& out)
{
    std::vector<int> idx(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (size > n) return;
    while (true) {
        out.push_back(idx);
        int i = size - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - size + i) --i;
        if (i < 0) return;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j) - 1] + 1;
    }
}

template <class Rng>
std::vector<double> draw_in_cone(int n, int m, Rng& rng, long& draws)
{
    std::uniform_real_distribution<double> dist(-1.0, 3.0);
    std::vector<double> lambda(static_cast<std::size_t>(n));
    while (true) {
        ++draws;
        for (auto& x : lambda) x = dist(rng);
        if (in_open_cone(lambda, m)) return lambda;
    }
}

} // namespace detail

/// Draws `samples` points of Γ_m (uniform on [-1,3]^n, rejection) and checks,
/// on each: monotonicity of S_m under addition of a second cone point, positivity
/// of S_{k;I} for k + |I| <= m, the telescoping expansion of S_{k-1}, the lower
/// bound S_{m-1} >= λ_1...λ_{m-1}, the product bound |λ_I| <= (n-k)^k S_k, the
/// weight bound λ_j S_{m-1;j} >= θ S_m, the weighted gradient bound, and the
/// Maclaurin comparison on Γ_n.
[[nodiscard]] inline ConeInequalityReport verify_cone_inequalities(int n, int m, long samples, std::uint64_t seed,
                                                                   double tolerance = 1e-10)
{
    require(n >= 2 && m >= 1 && m < n, "verify_cone_inequalities: need 1 <= m < n");
    require(samples >= 1, "verify_cone_inequalities: need samples >= 1");

    ConeInequalityReport report;
    report.n = n;
    report.m = m;
    report.samples = samples;
    report.seed = seed;
    report.tolerance = tolerance;
    report.theta_explicit = 1.0 / (std::pow(static_cast<double>(n - m), m) * binomial(n, m));

    enum Check { kMonotone, kPositivity, kPositiveEntries, kExpansion, kLowerSk, kProduct, kTheta, kGradient, kMaclaurin };
    const char* names[] = {"monotonicity",        "reduced_positivity", "m_positive_entries",
                           "expansion_identity",  "lower_bound_s_m_minus_1", "product_bound",
                           "theta_lower_bound",   "gradient_weighted_bound", "maclaurin"};
    for (const char* name : names) {
        InequalityTally t;
        t.name = name;
        report.checks.push_back(std::move(t));
    }
    auto& tally = report.checks;

    // Index sets I with |I| <= m-1 for the positivity check, |I| = k <= m-1 for the product bound.
    std::vector<std::vector<std::vector<int>>> subsets(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t) detail::subsets_of_size(n, t, subsets[static_cast<std::size_t>(t)]);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    std::vector<double> kept;
    std::vector<double> grad(static_cast<std::size_t>(n));
    const double inf = std::numeric_limits<double>::infinity();

    for (long s = 0; s < samples; ++s) {
        auto lambda = detail::draw_in_cone(n, m, rng, report.draws);
        std::sort(lambda.begin(), lambda.end(), std::greater<>());
        const auto mu = detail::draw_in_cone(n, m, rng, report.draws);
        std::vector<double> a(static_cast<std::size_t>(n));
        for (auto& x : a) x = coeff(rng);
        long ignored = 0;
        const auto nu = detail::draw_in_cone(n, n, rng, ignored);

        elementary_symmetric_upto(lambda, n, e);
        const double s_m = e[static_cast<std::size_t>(m)];

        {
            std::vector<double> sum(lambda);
            for (int i = 0; i < n; ++i) sum[static_cast<std::size_t>(i)] += mu[static_cast<std::size_t>(i)];
            tally[kMonotone].record(detail::relative_slack(elementary_symmetric(sum, m), s_m), lambda, tolerance);
        }

        {
            double worst = inf;
            for (int t = 0; t < m; ++t) {
                for (const auto& subset : subsets[static_cast<std::size_t>(t)]) {
                    kept.clear();
                    std::size_t cursor = 0;
                    for (int i = 0; i < n; ++i) {
                        if (cursor < subset.size() && subset[cursor] == i) {
                            ++cursor;
                            continue;
                        }
                        kept.push_back(lambda[static_cast<std::size_t>(i)]);
                    }
                    std::vector<double> r(static_cast<std::size_t>(m - t) + 1);
                    elementary_symmetric_upto(kept, m - t, r);
                    for (int k = 1; k <= m - t; ++k) worst = std::min(worst, detail::relative_slack(r[static_cast<std::size_t>(k)], 0.0));
                }
            }
            tally[kPositivity].record(worst, lambda, tolerance);
        }

        tally[kPositiveEntries].record(detail::relative_slack(lambda[static_cast<std::size_t>(m) - 1], 0.0), lambda, tolerance);

        {
            double worst = inf;
            for (int j = 1; j <= n; ++j) {
                double rhs = 0.0;
                double prefix = 1.0;
                for (int i = 0; i <= j; ++i) {
                    std::vector<int> excluded;
                    for (int l = 0; l < std::min(i + 1, n); ++l) excluded.push_back(l);
                    rhs += prefix * reduced_symmetric(lambda, j - i, excluded);
                    if (i < n) prefix *= lambda[static_cast<std::size_t>(i)];
                }
                const double lhs = e[static_cast<std::size_t>(j)];
                worst = std::min(worst, -std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)}));
            }
            tally[kExpansion].record(worst, lambda, tolerance);
        }

        {
            double prod = 1.0;
            for (int i = 0; i < m - 1; ++i) prod *= lambda[static_cast<std::size_t>(i)];
            tally[kLowerSk].record(detail::relative_slack(e[static_cast<std::size_t>(m) - 1], prod), lambda, tolerance);
        }

        {
            double worst = inf;
            for (int k = 1; k <= m - 1; ++k) {
                const double bound = std::pow(static_cast<double>(n - k), k) * e[static_cast<std::size_t>(k)];
                for (const auto& subset : subsets[static_cast<std::size_t>(k)]) {
                    double prod = 1.0;
                    for (int i : subset) prod *= lambda[static_cast<std::size_t>(i)];
                    worst = std::min(worst, detail::relative_slack(bound, std::abs(prod)));
                }
            }
            tally[kProduct].record(worst, lambda, tolerance);
        }

        reduced_symmetric_each(lambda, m - 1, grad);
        {
            double worst = inf;
            for (int j = 0; j < m; ++j) {
                const double lhs = lambda[static_cast<std::size_t>(j)] * grad[static_cast<std::size_t>(j)];
                report.theta_hat = std::min(report.theta_hat, lhs / s_m);
                worst = std::min(worst, detail::relative_slack(lhs, report.theta_explicit * s_m));
            }
            tally[kTheta].record(worst, lambda, tolerance);
        }

        {
            double weighted = 0.0;
            double plain = 0.0;
            for (int i = 0; i < n; ++i) {
                const double a2 = a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
                weighted += a2 * grad[static_cast<std::size_t>(i)];
                plain += a2;
            }
            const double lhs = n * e[1] / s_m * weighted;
            tally[kGradient].record(detail::relative_slack(lhs, report.theta_explicit * plain), lambda, tolerance);
        }

        {
            const double sm = elementary_symmetric(nu, m) / binomial(n, m);
            const double sn = elementary_symmetric(nu, n);
            tally[kMaclaurin].record(detail::relative_slack(std::pow(sm, 1.0 / m), std::pow(sn, 1.0 / n)), nu, tolerance);
        }
    }
    return report;
}

} // namespace hessianlab
