#pragma once

// Elementary symmetric functions S_k, their reduced variants S_{k;i_1...i_t},
// and membership in the Gårding cone Γ_m = {S_1 > 0, ..., S_m > 0}.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "hessianlab/error.hpp"

namespace hessianlab {

/// Binomial coefficient as a double; 0 outside 0 <= k <= n.
[[nodiscard]] inline double binomial(int n, int k)
{
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

/// A point λ in R^n. Optionally flagged as sorted non-increasingly, which is the
/// ordering the cone estimates refer to (λ_1 >= ... >= λ_n).
class ConeVector {
public:
    explicit ConeVector(std::vector<double> entries) : entries_(std::move(entries))
    {
        require(!entries_.empty(), "ConeVector: need n >= 1");
        for (double x : entries_) require(std::isfinite(x), "ConeVector: non-finite entry");
        sorted_ = std::is_sorted(entries_.begin(), entries_.end(), std::greater<>());
    }
    ConeVector(std::initializer_list<double> entries) : ConeVector(std::vector<double>(entries)) {}

    [[nodiscard]] static ConeVector sorted(std::vector<double> entries)
    {
        std::sort(entries.begin(), entries.end(), std::greater<>());
        return ConeVector(std::move(entries));
    }

    [[nodiscard]] int size() const noexcept { return static_cast<int>(entries_.size()); }
    [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }
    [[nodiscard]] double operator[](int i) const { return entries_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] bool is_sorted() const noexcept { return sorted_; }
    [[nodiscard]] ConeVector sorted_copy() const { return sorted(entries_); }

private:
    std::vector<double> entries_;
    bool sorted_ = false;
};

struct ConeReport {
    bool in_cone = false;
    std::vector<double> s_values;  // S_1 .. S_m
    double margin = 0.0;           // min_k S_k(λ) / S_k(1,...,1)
};

namespace detail {

inline constexpr std::size_t kStackDegree = 65;

template <class Fn>
decltype(auto) with_scratch(std::size_t len, Fn&& fn)
{
    if (len <= kStackDegree) {
        std::array<double, kStackDegree> buf{};
        return fn(std::span<double>(buf.data(), len));
    }
    std::vector<double> buf(len, 0.0);
    return fn(std::span<double>(buf));
}

} // namespace detail

/// Writes S_0..S_kmax of λ into out[0..kmax] by the prefix recurrence
/// e_j += x e_{j-1}; no subset enumeration.
inline void elementary_symmetric_upto(std::span<const double> lambda, int kmax, std::span<double> out)
{
    std::fill(out.begin(), out.begin() + kmax + 1, 0.0);
    out[0] = 1.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        const double x = lambda[i];
        const int top = std::min(static_cast<int>(i) + 1, kmax);
        for (int j = top; j >= 1; --j)
            out[static_cast<std::size_t>(j)] += x * out[static_cast<std::size_t>(j) - 1];
    }
}

/// S_k(λ); S_0 = 1 and S_k = 0 for k < 0 or k > n.
[[nodiscard]] inline double elementary_symmetric(std::span<const double> lambda, int k)
{
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n) return 0.0;
    if (k == 0) return 1.0;
    return detail::with_scratch(static_cast<std::size_t>(k) + 1, [&](std::span<double> e) {
        elementary_symmetric_upto(lambda, k, e);
        return e[static_cast<std::size_t>(k)];
    });
}

[[nodiscard]] inline double elementary_symmetric(const ConeVector& lambda, int k)
{
    return elementary_symmetric(lambda.entries(), k);
}

/// S_{k; excluded}(λ): S_k of λ with the excluded (0-based) entries deleted.
[[nodiscard]] inline double reduced_symmetric(std::span<const double> lambda, int k,
                                              std::span<const int> excluded)
{
    const int n = static_cast<int>(lambda.size());
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int idx : excluded) {
        require(idx >= 0 && idx < n, "reduced_symmetric: index " + std::to_string(idx) + " out of range");
        require(!seen[static_cast<std::size_t>(idx)], "reduced_symmetric: repeated index");
        seen[static_cast<std::size_t>(idx)] = true;
    }
    const int remaining = n - static_cast<int>(excluded.size());
    if (k < 0 || k > remaining) return 0.0;
    if (k == 0) return 1.0;
    return detail::with_scratch(static_cast<std::size_t>(remaining), [&](std::span<double> kept) {
        std::size_t j = 0;
        for (int i = 0; i < n; ++i)
            if (!seen[static_cast<std::size_t>(i)]) kept[j++] = lambda[static_cast<std::size_t>(i)];
        return elementary_symmetric(std::span<const double>(kept.data(), kept.size()), k);
    });
}

[[nodiscard]] inline double reduced_symmetric(const ConeVector& lambda, int k, std::span<const int> excluded)
{
    return reduced_symmetric(lambda.entries(), k, excluded);
}

[[nodiscard]] inline double reduced_symmetric(const ConeVector& lambda, int k, std::initializer_list<int> excluded)
{
    return reduced_symmetric(lambda.entries(), k, std::span<const int>(excluded.begin(), excluded.size()));
}

/// out[i] = S_{k;i}(λ) for every i.
inline void reduced_symmetric_each(std::span<const double> lambda, int k, std::span<double> out)
{
    const std::size_t n = lambda.size();
    if (k < 0 || k > static_cast<int>(n) - 1) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
        return;
    }
    detail::with_scratch(static_cast<std::size_t>(k) + 1, [&](std::span<double> e) {
        for (std::size_t i = 0; i < n; ++i) {
            std::fill(e.begin(), e.end(), 0.0);
            e[0] = 1.0;
            int seen = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                ++seen;
                const double x = lambda[j];
                for (int d = std::min(seen, k); d >= 1; --d) e[static_cast<std::size_t>(d)] += x * e[static_cast<std::size_t>(d) - 1];
            }
            out[i] = e[static_cast<std::size_t>(k)];
        }
        return 0;
    });
}

/// Strict membership λ ∈ Γ_m without building a report.
[[nodiscard]] inline bool in_open_cone(std::span<const double> lambda, int m)
{
    return detail::with_scratch(static_cast<std::size_t>(m) + 1, [&](std::span<double> e) {
        elementary_symmetric_upto(lambda, m, e);
        for (int k = 1; k <= m; ++k)
            if (!(e[static_cast<std::size_t>(k)] > 0.0)) return false;
        return true;
    });
}

/// min_k S_k(λ)/C(n,k) over k = 1..m; positive iff λ ∈ Γ_m.
[[nodiscard]] inline double cone_margin(std::span<const double> lambda, int m)
{
    const int n = static_cast<int>(lambda.size());
    return detail::with_scratch(static_cast<std::size_t>(m) + 1, [&](std::span<double> e) {
        elementary_symmetric_upto(lambda, m, e);
        double margin = e[1] / n;
        for (int k = 2; k <= m; ++k) margin = std::min(margin, e[static_cast<std::size_t>(k)] / binomial(n, k));
        return margin;
    });
}

[[nodiscard]] inline ConeReport in_cone(const ConeVector& lambda, int m)
{
    const int n = lambda.size();
    require(m >= 1 && m <= n, "in_cone: need 1 <= m <= n");
    std::vector<double> e(static_cast<std::size_t>(m) + 1);
    elementary_symmetric_upto(lambda.entries(), m, e);
    ConeReport report;
    report.s_values.assign(e.begin() + 1, e.end());
    report.in_cone = std::all_of(report.s_values.begin(), report.s_values.end(), [](double s) { return s > 0.0; });
    report.margin = e[1] / n;
    for (int k = 2; k <= m; ++k) report.margin = std::min(report.margin, e[static_cast<std::size_t>(k)] / binomial(n, k));
    return report;
}

/// ∂S_m/∂λ_i = S_{m-1;i}(λ), i = 1..n. Strictly positive on Γ_m.
[[nodiscard]] inline std::vector<double> symmetric_gradient(const ConeVector& lambda, int m)
{
    require(m >= 1 && m <= lambda.size(), "symmetric_gradient: need 1 <= m <= n");
    std::vector<double> grad(static_cast<std::size_t>(lambda.size()));
    reduced_symmetric_each(lambda.entries(), m - 1, grad);
    return grad;
}

} // namespace hessianlab
