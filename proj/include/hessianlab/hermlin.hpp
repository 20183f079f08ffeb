#pragma once

// Dense complex Hermitian matrices of dimension n <= 8 with fixed-capacity
// storage, cyclic complex Jacobi eigensolver, and the generalized problem
// det(g - λ ω) = 0 reduced through a Cholesky factor of ω.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hessianlab/error.hpp"
#include "hessianlab/symfunc.hpp"

namespace hessianlab {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 8;

/// Square complex matrix of dimension n <= kMaxDim, row-major, stored inline.
class CMatrix {
public:
    CMatrix() = default;
    explicit CMatrix(int n) : n_(n)
    {
        require(n >= 1 && n <= kMaxDim, "matrix dimension must be in [1, 8]");
    }

    [[nodiscard]] int dim() const noexcept { return n_; }
    cplx& operator()(int r, int c) noexcept { return a_[static_cast<std::size_t>(r * kMaxDim + c)]; }
    const cplx& operator()(int r, int c) const noexcept { return a_[static_cast<std::size_t>(r * kMaxDim + c)]; }

    [[nodiscard]] static CMatrix identity(int n)
    {
        CMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    [[nodiscard]] CMatrix adjoint() const
    {
        CMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b)
    {
        CMatrix r(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (int j = 0; j < a.n_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    [[nodiscard]] double frobenius_norm() const
    {
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) s += std::norm((*this)(i, j));
        return std::sqrt(s);
    }

private:
    int n_ = 0;
    std::array<cplx, kMaxDim * kMaxDim> a_{};
};

/// Coefficient matrix of a real (1,1)-form: entries[j][k] = conj(entries[k][j]).
class HermitianForm {
public:
    static constexpr double kHermitianTolerance = 1e-13;

    HermitianForm() = default;

    /// Row-major n×n entries; rejects anything non-Hermitian beyond 1e-13 and
    /// then stores the exactly symmetrized matrix.
    HermitianForm(int n, std::span<const cplx> row_major) : m_(n)
    {
        require(row_major.size() == static_cast<std::size_t>(n * n), "HermitianForm: expected n*n entries");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m_(i, j) = row_major[static_cast<std::size_t>(i * n + j)];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const cplx a = m_(i, j);
                const cplx b = m_(j, i);
                require(std::abs(a - std::conj(b)) <= kHermitianTolerance,
                        "HermitianForm: entries (" + std::to_string(i) + "," + std::to_string(j) + ") not Hermitian");
                m_(i, j) = 0.5 * (a + std::conj(b));
                m_(j, i) = std::conj(m_(i, j));
            }
    }

    HermitianForm(int n, std::initializer_list<cplx> row_major)
        : HermitianForm(n, std::span<const cplx>(row_major.begin(), row_major.size()))
    {
    }

    [[nodiscard]] static HermitianForm identity(int n) { return from_trusted(CMatrix::identity(n)); }

    [[nodiscard]] static HermitianForm diagonal(std::span<const double> values)
    {
        CMatrix m(static_cast<int>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = values[i];
        return from_trusted(m);
    }
    [[nodiscard]] static HermitianForm diagonal(std::initializer_list<double> values)
    {
        return diagonal(std::span<const double>(values.begin(), values.size()));
    }

    /// Wraps a matrix the caller guarantees Hermitian up to roundoff; the
    /// lower triangle is overwritten with the conjugate of the upper one.
    [[nodiscard]] static HermitianForm from_trusted(const CMatrix& m)
    {
        HermitianForm h;
        h.m_ = m;
        const int n = m.dim();
        for (int i = 0; i < n; ++i) {
            h.m_(i, i) = h.m_(i, i).real();
            for (int j = i + 1; j < n; ++j) h.m_(j, i) = std::conj(h.m_(i, j));
        }
        return h;
    }

    [[nodiscard]] int dim() const noexcept { return m_.dim(); }
    [[nodiscard]] const cplx& operator()(int r, int c) const noexcept { return m_(r, c); }
    [[nodiscard]] const CMatrix& matrix() const noexcept { return m_; }

    [[nodiscard]] double trace() const
    {
        double t = 0.0;
        for (int i = 0; i < dim(); ++i) t += m_(i, i).real();
        return t;
    }

    friend HermitianForm operator+(const HermitianForm& a, const HermitianForm& b)
    {
        require(a.dim() == b.dim(), "HermitianForm: dimension mismatch");
        CMatrix r(a.dim());
        for (int i = 0; i < a.dim(); ++i)
            for (int j = 0; j < a.dim(); ++j) r(i, j) = a(i, j) + b(i, j);
        return from_trusted(r);
    }

    friend HermitianForm operator*(double s, const HermitianForm& a)
    {
        CMatrix r(a.dim());
        for (int i = 0; i < a.dim(); ++i)
            for (int j = 0; j < a.dim(); ++j) r(i, j) = s * a(i, j);
        return from_trusted(r);
    }

    /// U* A U for a unitary (or any) U.
    [[nodiscard]] HermitianForm congruence(const CMatrix& u) const { return from_trusted(u.adjoint() * m_ * u); }

private:
    CMatrix m_;
};

/// Eigenvalues sorted non-increasingly; frame columns are the matching
/// eigenvectors, orthonormal for the metric of the problem that produced them.
struct Spectrum {
    int n = 0;
    std::array<double, kMaxDim> values{};
    CMatrix frame;

    [[nodiscard]] std::span<const double> eigenvalues() const { return {values.data(), static_cast<std::size_t>(n)}; }
};

namespace detail {

inline double off_diagonal_norm(const CMatrix& a)
{
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// In-place cyclic Jacobi on Hermitian `a`; accumulates rotations into `v`.
inline void jacobi_hermitian(CMatrix& a, CMatrix& v)
{
    const int n = a.dim();
    const double scale = a.frobenius_norm();
    if (scale == 0.0) return;
    const double target = 1e-15 * scale;
    for (int sweep = 0; sweep < 64; ++sweep) {
        if (off_diagonal_norm(a) <= target) return;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double r = std::abs(a(p, q));
                if (r <= 1e-300 || r <= 1e-18 * scale) {
                    a(p, q) = a(q, p) = 0.0;
                    continue;
                }
                // Phase e^{-iφ} on column q makes a(p,q) real and positive, then a
                // real rotation annihilates it.
                const cplx phase = std::conj(a(p, q)) / r;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * r);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // J = [[c, s], [-s·phase, c·phase]] acting on columns (p, q).
                const cplx jpp = c;
                const cplx jpq = s;
                const cplx jqp = -s * phase;
                const cplx jqq = c * phase;
                for (int k = 0; k < n; ++k) {
                    const cplx x = a(k, p);
                    const cplx y = a(k, q);
                    a(k, p) = x * jpp + y * jqp;
                    a(k, q) = x * jpq + y * jqq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx x = a(p, k);
                    const cplx y = a(q, k);
                    a(p, k) = std::conj(jpp) * x + std::conj(jqp) * y;
                    a(q, k) = std::conj(jpq) * x + std::conj(jqq) * y;
                }
                a(p, q) = a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (int k = 0; k < n; ++k) {
                    const cplx x = v(k, p);
                    const cplx y = v(k, q);
                    v(k, p) = x * jpp + y * jqp;
                    v(k, q) = x * jpq + y * jqq;
                }
            }
    }
}

inline Spectrum sorted_spectrum(const CMatrix& diag, const CMatrix& vectors)
{
    const int n = diag.dim();
    std::array<int, kMaxDim> order{};
    std::iota(order.begin(), order.begin() + n, 0);
    std::sort(order.begin(), order.begin() + n,
              [&](int i, int j) { return diag(i, i).real() > diag(j, j).real(); });
    Spectrum s;
    s.n = n;
    s.frame = CMatrix(n);
    for (int c = 0; c < n; ++c) {
        const int src = order[static_cast<std::size_t>(c)];
        s.values[static_cast<std::size_t>(c)] = diag(src, src).real();
        for (int r = 0; r < n; ++r) s.frame(r, c) = vectors(r, src);
    }
    return s;
}

// Lower-triangular L with L L* = ω; throws unless ω is positive definite.
inline CMatrix cholesky(const HermitianForm& omega)
{
    const int n = omega.dim();
    const double floor = 1e-12 * std::max(omega.trace(), 0.0) / n;
    CMatrix l(n);
    for (int j = 0; j < n; ++j) {
        double d = omega(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > floor)) throw InputError("metric is not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            cplx s = omega(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

// Inverse of a lower-triangular matrix.
inline CMatrix lower_inverse(const CMatrix& l)
{
    const int n = l.dim();
    CMatrix inv(n);
    for (int i = 0; i < n; ++i) {
        inv(i, i) = 1.0 / l(i, i);
        for (int j = 0; j < i; ++j) {
            cplx s = 0.0;
            for (int k = j; k < i; ++k) s -= l(i, k) * inv(k, j);
            inv(i, j) = s / l(i, i);
        }
    }
    return inv;
}

} // namespace detail

/// Eigen-decomposition of a Hermitian form by cyclic complex Jacobi rotations.
[[nodiscard]] inline Spectrum eigenvalues_hermitian(const HermitianForm& a)
{
    CMatrix work = a.matrix();
    CMatrix vectors = CMatrix::identity(a.dim());
    detail::jacobi_hermitian(work, vectors);
    return detail::sorted_spectrum(work, vectors);
}

/// Cholesky factor data of a metric, reusable across many eigenproblems.
struct MetricFactor {
    CMatrix lower_inverse;  // L^{-1} with ω = L L*
    bool identity = false;

    explicit MetricFactor(const HermitianForm& omega)
    {
        bool is_identity = true;
        for (int i = 0; i < omega.dim() && is_identity; ++i)
            for (int j = 0; j < omega.dim(); ++j)
                if (omega(i, j) != (i == j ? cplx(1.0) : cplx(0.0))) {
                    is_identity = false;
                    break;
                }
        identity = is_identity;
        lower_inverse = is_identity ? CMatrix::identity(omega.dim()) : detail::lower_inverse(detail::cholesky(omega));
    }
};

/// Solves det(g - λ ω) = 0 given a prepared factor of ω. The frame is ω-orthonormal.
[[nodiscard]] inline Spectrum generalized_eigenvalues(const HermitianForm& g, const MetricFactor& factor)
{
    require(g.dim() == factor.lower_inverse.dim(), "generalized_eigenvalues: dimension mismatch");
    if (factor.identity) return eigenvalues_hermitian(g);
    const CMatrix& li = factor.lower_inverse;
    const CMatrix reduced = li * g.matrix() * li.adjoint();
    Spectrum s = eigenvalues_hermitian(HermitianForm::from_trusted(reduced));
    s.frame = li.adjoint() * s.frame;
    return s;
}

[[nodiscard]] inline Spectrum generalized_eigenvalues(const HermitianForm& g, const HermitianForm& omega)
{
    require(g.dim() == omega.dim(), "generalized_eigenvalues: dimension mismatch");
    return generalized_eigenvalues(g, MetricFactor(omega));
}

/// (ω,m)-positivity: the eigenvalues of g relative to ω lie in the open cone Γ_m.
[[nodiscard]] inline bool is_m_positive(const HermitianForm& g, const HermitianForm& omega, int m)
{
    require(m >= 1 && m <= g.dim(), "is_m_positive: need 1 <= m <= n");
    const Spectrum s = generalized_eigenvalues(g, omega);
    return in_open_cone(s.eigenvalues(), m);
}

/// Determinant of a Hermitian matrix (real), via the Jacobi spectrum.
[[nodiscard]] inline double determinant(const HermitianForm& a)
{
    const Spectrum s = eigenvalues_hermitian(a);
    double d = 1.0;
    for (double x : s.eigenvalues()) d *= x;
    return d;
}

} // namespace hessianlab
