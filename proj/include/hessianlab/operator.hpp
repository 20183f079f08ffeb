#pragma once

// The normalized Hessian quotient σ_m(u) = (ω+dd^c u)^m ∧ ω^{n-m} / ω^n
// = S_m(λ)/C(n,m), λ the eigenvalues of ω + dd^c u relative to ω, its
// linearization, and mixed products of m forms by polarization.
//
// Normalization: σ_m(0) = 1 on any metric. Unnormalized wedge quotients are
// C(n,m) · σ_m; every equation in this library is written for σ_m.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <vector>

#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/hermlin.hpp"
#include "hessianlab/parallel.hpp"
#include "hessianlab/symfunc.hpp"

namespace hessianlab {

/// σ_m of one form γ relative to ω: S_m(λ(ω^{-1}γ))/C(n,m). Defined for any
/// Hermitian γ (a polynomial in its entries), not only for cone points.
[[nodiscard]] inline double sigma_of_form(const HermitianForm& gamma, const HermitianForm& omega, int m)
{
    require(m >= 1 && m <= gamma.dim(), "sigma_of_form: need 1 <= m <= n");
    const Spectrum s = generalized_eigenvalues(gamma, omega);
    return elementary_symmetric(s.eigenvalues(), m) / binomial(gamma.dim(), m);
}

struct OperatorValue {
    ScalarField sigma;                    // S_m(λ)/C(n,m) at every point
    std::vector<std::uint8_t> cone_mask;  // λ ∈ Γ_m strictly
    ScalarField margin;                   // min_k S_k(λ)/C(n,k)

    [[nodiscard]] bool all_in_cone() const
    {
        for (auto c : cone_mask)
            if (!c) return false;
        return true;
    }
    [[nodiscard]] double margin_min() const { return margin.min(); }
};

namespace detail {

inline void check_operator_args(const ScalarField& u, const MetricField& omega, int m)
{
    require(u.grid() == omega.grid(), "operator: field and metric live on different grids");
    require(m >= 1 && m <= u.grid().n(), "operator: need 1 <= m <= n");
}

// ω + U at point p, U given row-major.
inline HermitianForm shifted_form(const HermitianForm& omega, std::span<const cplx> u_entries)
{
    const int n = omega.dim();
    CMatrix g = omega.matrix();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) += u_entries[static_cast<std::size_t>(i * n + j)];
    return HermitianForm::from_trusted(g);
}

// Evaluates per-point spectra of ω + dd^c u and calls fn(p, spectrum).
template <class Fn>
void for_each_spectrum(const ScalarField& u, const MetricField& omega, Fn&& fn)
{
    const int n = u.grid().n();
    if (omega.is_constant()) {
        const HermitianForm w = omega.at(0);
        const MetricFactor factor(w);
        parallel_for(u.size(), [&](std::size_t p) {
            std::array<cplx, 9> raw{};
            complex_hessian_at(u, p, std::span<cplx>(raw.data(), static_cast<std::size_t>(n * n)));
            fn(p, generalized_eigenvalues(shifted_form(w, raw), factor));
        });
    } else {
        parallel_for(u.size(), [&](std::size_t p) {
            std::array<cplx, 9> raw{};
            complex_hessian_at(u, p, std::span<cplx>(raw.data(), static_cast<std::size_t>(n * n)));
            const HermitianForm w = omega.at(p);
            fn(p, generalized_eigenvalues(shifted_form(w, raw), MetricFactor(w)));
        });
    }
}

} // namespace detail

/// σ_m(u) pointwise together with strict Γ_m membership. m = n is accepted as a
/// Monge–Ampère cross-check.
[[nodiscard]] inline OperatorValue sigma_m(const ScalarField& u, const MetricField& omega, int m)
{
    detail::check_operator_args(u, omega, m);
    const int n = u.grid().n();
    const double norm = binomial(n, m);
    OperatorValue out{ScalarField(u.grid()), std::vector<std::uint8_t>(u.size(), 0), ScalarField(u.grid())};
    detail::for_each_spectrum(u, omega, [&](std::size_t p, const Spectrum& s) {
        std::array<double, kMaxDim + 1> e{};
        elementary_symmetric_upto(s.eigenvalues(), m, std::span<double>(e.data(), static_cast<std::size_t>(m) + 1));
        out.sigma[p] = e[static_cast<std::size_t>(m)] / norm;
        double margin = e[1] / n;
        bool inside = e[1] > 0.0;
        for (int k = 2; k <= m; ++k) {
            margin = std::min(margin, e[static_cast<std::size_t>(k)] / binomial(n, k));
            inside = inside && e[static_cast<std::size_t>(k)] > 0.0;
        }
        out.margin[p] = margin;
        out.cone_mask[p] = inside ? 1 : 0;
    });
    return out;
}

/// σ_m evaluated with the exact complex Hessian of a trigonometric polynomial
/// (no finite differences). Used to manufacture right-hand sides.
[[nodiscard]] inline ScalarField sigma_m_exact(const FieldSpec& spec, const MetricField& omega, int m)
{
    const TorusGrid& grid = omega.grid();
    require(m >= 1 && m <= grid.n(), "sigma_m_exact: need 1 <= m <= n");
    ScalarField out(grid);
    parallel_for(grid.points(), [&](std::size_t p) {
        const HermitianForm w = omega.at(p);
        out[p] = sigma_of_form(w + analytic_complex_hessian(spec, grid, p), w, m);
    });
    return out;
}

/// Newton coefficients of G(u) = log σ_m(u) − q u − g at a cone point u:
/// DG[v] = Σ_k w_k e_k^* (dd^c v) e_k − q v with w_k = S_{m-1;k}/S_m and e_k
/// the ω-orthonormal eigenframe. Also stores the equivalent real coefficients
/// a_{rs} of Σ_{r,s} a_{rs} ∂_r∂_s v for matrix-free application.
class LinearizationField {
public:
    [[nodiscard]] const TorusGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] double q() const noexcept { return q_; }
    void set_q(double q) noexcept { q_ = q; }

    [[nodiscard]] std::span<const double> weights(std::size_t p) const
    {
        const auto n = static_cast<std::size_t>(grid_.n());
        return {weights_.data() + p * n, n};
    }
    /// Column k of the returned n×n row-major block is e_k.
    [[nodiscard]] std::span<const cplx> frame(std::size_t p) const
    {
        const auto nn = static_cast<std::size_t>(grid_.n() * grid_.n());
        return {frames_.data() + p * nn, nn};
    }
    /// Packed upper triangle (row-major, diagonal included) of a_{rs}.
    [[nodiscard]] std::span<const double> coefficients(std::size_t p) const
    {
        return {coeffs_.data() + p * packed_, packed_};
    }
    [[nodiscard]] std::size_t packed_size() const noexcept { return packed_; }

    /// Grid average of a_{rs}, full 2n×2n row-major.
    [[nodiscard]] std::vector<double> mean_coefficients() const
    {
        const int dims = grid_.real_dims();
        std::vector<double> mean(static_cast<std::size_t>(dims * dims), 0.0);
        std::size_t idx = 0;
        for (int r = 0; r < dims; ++r)
            for (int s = r; s < dims; ++s, ++idx) {
                const double avg = deterministic_sum(grid_.points(), [&](std::size_t p) { return coeffs_[p * packed_ + idx]; }) /
                                   static_cast<double>(grid_.points());
                mean[static_cast<std::size_t>(r * dims + s)] = avg;
                mean[static_cast<std::size_t>(s * dims + r)] = avg;
            }
        return mean;
    }

    /// Coefficient of v(p) itself in DG[v](p).
    [[nodiscard]] double diagonal(std::size_t p) const
    {
        const int dims = grid_.real_dims();
        const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
        const auto a = coefficients(p);
        double d = 0.0;
        std::size_t idx = 0;
        for (int r = 0; r < dims; ++r) {
            d += a[idx] * (-2.0 * inv_h2);
            idx += static_cast<std::size_t>(dims - r);
        }
        return d - q_;
    }

private:
    friend LinearizationField linearization(const ScalarField&, const MetricField&, int, double);

    TorusGrid grid_;
    int m_ = 1;
    double q_ = 0.0;
    std::size_t packed_ = 0;
    std::vector<double> weights_;
    std::vector<cplx> frames_;
    std::vector<double> coeffs_;
};

/// Builds the Newton coefficients at u. Throws ConeBreachError (with the point
/// of smallest cone margin and its λ) unless λ ∈ Γ_m everywhere.
[[nodiscard]] inline LinearizationField linearization(const ScalarField& u, const MetricField& omega, int m, double q)
{
    detail::check_operator_args(u, omega, m);
    const TorusGrid& grid = u.grid();
    const int n = grid.n();
    const int dims = grid.real_dims();
    LinearizationField L;
    L.grid_ = grid;
    L.m_ = m;
    L.q_ = q;
    L.packed_ = static_cast<std::size_t>(dims * (dims + 1) / 2);
    L.weights_.resize(grid.points() * static_cast<std::size_t>(n));
    L.frames_.resize(grid.points() * static_cast<std::size_t>(n * n));
    L.coeffs_.resize(grid.points() * L.packed_);
    std::vector<double> margins(grid.points());

    detail::for_each_spectrum(u, omega, [&](std::size_t p, const Spectrum& s) {
        const auto lam = s.eigenvalues();
        std::array<double, kMaxDim + 1> e{};
        elementary_symmetric_upto(lam, m, std::span<double>(e.data(), static_cast<std::size_t>(m) + 1));
        double margin = e[1] / n;
        for (int k = 2; k <= m; ++k) margin = std::min(margin, e[static_cast<std::size_t>(k)] / binomial(n, k));
        bool inside = true;
        for (int k = 1; k <= m; ++k) inside = inside && e[static_cast<std::size_t>(k)] > 0.0;
        margins[p] = inside ? margin : std::min(margin, 0.0) - 1.0;

        std::array<double, kMaxDim> grad{};
        reduced_symmetric_each(lam, m - 1, std::span<double>(grad.data(), static_cast<std::size_t>(n)));
        const double sm = e[static_cast<std::size_t>(m)];
        double* w = L.weights_.data() + p * static_cast<std::size_t>(n);
        cplx* fr = L.frames_.data() + p * static_cast<std::size_t>(n * n);
        for (int k = 0; k < n; ++k) w[k] = grad[static_cast<std::size_t>(k)] / sm;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) fr[i * n + k] = s.frame(i, k);

        // M = Σ_k w_k e_k e_k^*, then a_{rs} from Re tr(M U).
        std::array<cplx, 9> M{};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx acc = 0.0;
                for (int k = 0; k < n; ++k) acc += w[k] * s.frame(i, k) * std::conj(s.frame(j, k));
                M[static_cast<std::size_t>(i * n + j)] = acc;
            }
        std::array<double, 36> a{};
        auto A = [&](int r, int c) -> double& { return a[static_cast<std::size_t>(r * dims + c)]; };
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const cplx mjk = M[static_cast<std::size_t>(j * n + k)];
                A(2 * j, 2 * k) = 0.25 * mjk.real();
                A(2 * j + 1, 2 * k + 1) = 0.25 * mjk.real();
                A(2 * j, 2 * k + 1) = 0.25 * mjk.imag();
                A(2 * j + 1, 2 * k) = -0.25 * mjk.imag();
            }
        double* packed = L.coeffs_.data() + p * L.packed_;
        std::size_t idx = 0;
        for (int r = 0; r < dims; ++r)
            for (int c = r; c < dims; ++c, ++idx) packed[idx] = r == c ? A(r, c) : 0.5 * (A(r, c) + A(c, r));
    });

    std::size_t worst = 0;
    for (std::size_t p = 1; p < margins.size(); ++p)
        if (margins[p] < margins[worst]) worst = p;
    if (!(margins[worst] > 0.0)) {
        std::array<cplx, 9> raw{};
        complex_hessian_at(u, worst, std::span<cplx>(raw.data(), static_cast<std::size_t>(n * n)));
        const HermitianForm w = omega.at(worst);
        const Spectrum s = generalized_eigenvalues(detail::shifted_form(w, raw), w);
        std::vector<double> lam(s.eigenvalues().begin(), s.eigenvalues().end());
        throw ConeBreachError("linearization: ω + dd^c u leaves Γ_" + std::to_string(m) + " at grid point " +
                                  std::to_string(worst),
                              worst, std::move(lam));
    }
    return L;
}

/// DG[v](p) at one point.
[[nodiscard]] inline double apply_linearization_at(const LinearizationField& L, const ScalarField& v, std::size_t p)
{
    const TorusGrid& g = L.grid();
    const int dims = g.real_dims();
    const Stencil st(g, p);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const double* base = v.values().data() + p;
    const double center = *base;
    const auto a = L.coefficients(p);
    double acc = 0.0;
    std::size_t idx = 0;
    for (int r = 0; r < dims; ++r) {
        const auto pr = st.plus[static_cast<std::size_t>(r)];
        const auto mr = st.minus[static_cast<std::size_t>(r)];
        acc += a[idx++] * (base[pr] - 2.0 * center + base[mr]) * inv_h2;
        for (int s = r + 1; s < dims; ++s, ++idx) {
            const auto ps = st.plus[static_cast<std::size_t>(s)];
            const auto ms = st.minus[static_cast<std::size_t>(s)];
            // 2 a_rs · cross difference / (4h²)
            acc += a[idx] * (base[pr + ps] - base[pr + ms] - base[mr + ps] + base[mr + ms]) * (0.5 * inv_h2);
        }
    }
    return acc - L.q() * center;
}

/// DG[v] on the whole grid, matrix-free.
[[nodiscard]] inline ScalarField apply_linearization(const LinearizationField& L, const ScalarField& v)
{
    require(L.grid() == v.grid(), "apply_linearization: grid mismatch");
    ScalarField out(v.grid());
    parallel_for(v.size(), [&](std::size_t p) { out[p] = apply_linearization_at(L, v, p); });
    return out;
}

// ---------------------------------------------------------------------------
// Mixed products by polarization

/// Fixed node set for recovering the coefficients of
/// P(x) = σ_m(γ_0 + x_1 γ_1 + ... + x_k γ_k), k = m − 1, a polynomial of total
/// degree <= k+1 in x ∈ [0,1]^k with d = C(2k+1, k) monomials. Nodes are the
/// first d points of the Halton sequence; `weights` is the row of V^{-T}
/// extracting the coefficient of x_1⋯x_k.
struct PolarizationScheme {
    int k = 0;
    int d = 0;
    std::vector<std::vector<double>> nodes;
    std::vector<long double> weights;
    double min_pivot = 0.0;
};

namespace detail {

inline double radical_inverse(std::uint64_t index, std::uint64_t base)
{
    double inv = 1.0 / static_cast<double>(base);
    double f = inv;
    double r = 0.0;
    while (index > 0) {
        r += f * static_cast<double>(index % base);
        index /= base;
        f *= inv;
    }
    return r;
}

inline void monomials(int k, int max_degree, std::vector<std::vector<int>>& out)
{
    std::vector<int> alpha(static_cast<std::size_t>(k), 0);
    std::function<void(int, int)> rec = [&](int var, int remaining) {
        if (var == k) {
            out.push_back(alpha);
            return;
        }
        for (int a = 0; a <= remaining; ++a) {
            alpha[static_cast<std::size_t>(var)] = a;
            rec(var + 1, remaining - a);
        }
        alpha[static_cast<std::size_t>(var)] = 0;
    };
    rec(0, max_degree);
}

inline PolarizationScheme build_polarization_scheme(int k)
{
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    PolarizationScheme sch;
    sch.k = k;
    std::vector<std::vector<int>> basis;
    monomials(k, k + 1, basis);
    sch.d = static_cast<int>(basis.size());
    const auto d = static_cast<std::size_t>(sch.d);
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> x(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = radical_inverse(j + 1, primes[i]);
        sch.nodes.push_back(std::move(x));
    }
    // V_{ij} = e_i(X_j); solve V c = e_{α*} so that b_{α*} = c · (P(X_j))_j.
    // Extended precision plus refinement: V^{-1} has entries near 1e4 at k = 5.
    using real = long double;
    std::vector<real> V(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            real v = 1.0L;
            for (int t = 0; t < k; ++t)
                for (int e = 0; e < basis[i][static_cast<std::size_t>(t)]; ++e) v *= sch.nodes[j][static_cast<std::size_t>(t)];
            V[i * d + j] = v;
        }
    std::size_t target = d;
    for (std::size_t i = 0; i < d; ++i)
        if (std::all_of(basis[i].begin(), basis[i].end(), [](int a) { return a == 1; })) target = i;

    std::vector<real> LU = V;
    std::vector<std::size_t> perm(d);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    sch.min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(LU[r * d + col]) > std::abs(LU[piv * d + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < d; ++c) std::swap(LU[col * d + c], LU[piv * d + c]);
            std::swap(perm[col], perm[piv]);
        }
        const real pv = LU[col * d + col];
        sch.min_pivot = std::min(sch.min_pivot, static_cast<double>(std::abs(pv)));
        if (std::abs(pv) < 1e-13L) throw std::logic_error("polarization node set is singular");
        for (std::size_t r = col + 1; r < d; ++r) {
            const real f = LU[r * d + col] / pv;
            LU[r * d + col] = f;
            if (f == 0.0L) continue;
            for (std::size_t c = col + 1; c < d; ++c) LU[r * d + c] -= f * LU[col * d + c];
        }
    }
    const auto lu_solve = [&](const std::vector<real>& b) {
        std::vector<real> y(d);
        for (std::size_t i = 0; i < d; ++i) {
            real s = b[perm[i]];
            for (std::size_t c = 0; c < i; ++c) s -= LU[i * d + c] * y[c];
            y[i] = s;
        }
        for (std::size_t i = d; i-- > 0;) {
            real s = y[i];
            for (std::size_t c = i + 1; c < d; ++c) s -= LU[i * d + c] * y[c];
            y[i] = s / LU[i * d + i];
        }
        return y;
    };
    std::vector<real> rhs(d, 0.0L);
    rhs[target] = 1.0L;
    std::vector<real> c = lu_solve(rhs);
    for (int sweep = 0; sweep < 2; ++sweep) {
        std::vector<real> r = rhs;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) r[i] -= V[i * d + j] * c[j];
        const auto dc = lu_solve(r);
        for (std::size_t i = 0; i < d; ++i) c[i] += dc[i];
    }
    sch.weights.assign(c.begin(), c.end());
    return sch;
}

using lcplx = std::complex<long double>;

inline long double minor_determinant(const std::vector<lcplx>& a, int n, const std::vector<int>& idx)
{
    const auto m = idx.size();
    std::vector<lcplx> b(m * m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) b[r * m + c] = a[static_cast<std::size_t>(idx[r] * n + idx[c])];
    lcplx det = 1.0L;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(b[r * m + col]) > std::abs(b[piv * m + col])) piv = r;
        if (b[piv * m + col] == lcplx(0.0L)) return 0.0L;
        if (piv != col) {
            for (std::size_t c = 0; c < m; ++c) std::swap(b[col * m + c], b[piv * m + c]);
            det = -det;
        }
        det *= b[col * m + col];
        for (std::size_t r = col + 1; r < m; ++r) {
            const lcplx f = b[r * m + col] / b[col * m + col];
            for (std::size_t c = col + 1; c < m; ++c) b[r * m + c] -= f * b[col * m + c];
        }
    }
    return det.real();
}

// S_m of the eigenvalues of the Hermitian n×n matrix `a`, as the sum of its
// principal m×m minors.
inline long double principal_minor_sum(const std::vector<lcplx>& a, int n, int m)
{
    long double total = 0.0L;
    std::vector<int> idx;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != m) continue;
        idx.clear();
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        total += minor_determinant(a, n, idx);
    }
    return total;
}

} // namespace detail

inline constexpr int kMaxMixedDegree = 6;

/// Cached node set for m = k + 1 forms, 1 <= m <= 6.
[[nodiscard]] inline const PolarizationScheme& polarization_scheme(int m)
{
    require(m >= 1 && m <= kMaxMixedDegree, "polarization_scheme: need 1 <= m <= 6");
    static std::array<PolarizationScheme, kMaxMixedDegree> cache;
    static std::array<std::once_flag, kMaxMixedDegree> once;
    const auto slot = static_cast<std::size_t>(m - 1);
    std::call_once(once[slot], [&] { cache[slot] = detail::build_polarization_scheme(m - 1); });
    return cache[slot];
}

/// Constant C with |γ_1 ∧ ... ∧ γ_m ∧ ω^{n-m}/ω^n| <= C σ_m(γ_1 + ... + γ_m)
/// for cone forms γ_i, read off the fixed Vandermonde inverse.
[[nodiscard]] inline double polarization_constant(int m)
{
    const auto& sch = polarization_scheme(m);
    double s = 0.0;
    for (long double w : sch.weights) s += static_cast<double>(std::abs(w));
    return s / std::tgamma(m + 1.0);
}

/// Normalized mixed coefficient γ_1 ∧ ... ∧ γ_m ∧ ω^{n-m} / ω^n (equal to
/// σ_m(γ) when all γ_i = γ), by evaluating σ_m on the fixed polarization nodes.
[[nodiscard]] inline double mixed_product(std::span<const HermitianForm> gammas, const HermitianForm& omega, int m)
{
    require(static_cast<int>(gammas.size()) == m, "mixed_product: need exactly m forms");
    require(m >= 1 && m <= omega.dim(), "mixed_product: need 1 <= m <= n");
    for (const auto& g : gammas) require(g.dim() == omega.dim(), "mixed_product: dimension mismatch");
    const auto& sch = polarization_scheme(m);
    const MetricFactor factor(omega);
    const int n = omega.dim();
    const auto nn = static_cast<std::size_t>(n * n);
    // Reduced forms L^{-1} γ_i L^{-*} in extended precision; the node sum cancels
    // by up to six digits at m = 6.
    std::vector<std::vector<detail::lcplx>> reduced(static_cast<std::size_t>(m), std::vector<detail::lcplx>(nn));
    const CMatrix& li = factor.lower_inverse;
    for (int i = 0; i < m; ++i) {
        const HermitianForm& g = gammas[static_cast<std::size_t>(i)];
        auto& out = reduced[static_cast<std::size_t>(i)];
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                detail::lcplx acc = 0.0L;
                for (int p = 0; p <= r; ++p)
                    for (int q = 0; q <= c; ++q)
                        acc += detail::lcplx(li(r, p)) * detail::lcplx(g(p, q)) * std::conj(detail::lcplx(li(c, q)));
                out[static_cast<std::size_t>(r * n + c)] = acc;
            }
    }
    std::vector<detail::lcplx> tau(nn);
    long double b = 0.0L;
    for (int j = 0; j < sch.d; ++j) {
        tau = reduced[0];
        for (int i = 1; i < m; ++i) {
            const long double x = sch.nodes[static_cast<std::size_t>(j)][static_cast<std::size_t>(i - 1)];
            const auto& gi = reduced[static_cast<std::size_t>(i)];
            for (std::size_t e = 0; e < nn; ++e) tau[e] += x * gi[e];
        }
        b += sch.weights[static_cast<std::size_t>(j)] * detail::principal_minor_sum(tau, n, m);
    }
    return static_cast<double>(b / (binomial(n, m) * std::tgamma(m + 1.0)));
}

[[nodiscard]] inline double mixed_product(std::initializer_list<HermitianForm> gammas, const HermitianForm& omega, int m)
{
    return mixed_product(std::span<const HermitianForm>(gammas.begin(), gammas.size()), omega, m);
}

} // namespace hessianlab
