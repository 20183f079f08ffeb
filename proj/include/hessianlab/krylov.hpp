#pragma once

// Restarted GMRES for the Newton correction DG[v] = rhs, applied matrix-free.
// Right preconditioning keeps the minimized residual equal to the true one.

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include <fftw3.h>

#include "hessianlab/error.hpp"
#include "hessianlab/geometry.hpp"
#include "hessianlab/operator.hpp"
#include "hessianlab/parallel.hpp"

namespace hessianlab {

enum class Preconditioner {
    Diagonal,  // pointwise inverse of the stencil centre coefficient
    Spectral,  // exact inverse of the grid-averaged constant-coefficient operator (FFT)
};

struct KrylovOptions {
    double tol = 1e-10;                 // relative ℓ2 residual
    int restart = 30;
    int max_iterations = 0;             // 0 → 10 · N^n
    Preconditioner preconditioner = Preconditioner::Spectral;
};

struct KrylovResult {
    ScalarField solution;
    int iterations = 0;
    double residual_norm = 0.0;         // ‖DG[v] − rhs‖₂, recomputed explicitly
    double rhs_norm = 0.0;
    [[nodiscard]] double relative_residual() const { return rhs_norm > 0.0 ? residual_norm / rhs_norm : 0.0; }
};

/// FFT-diagonalized inverse of Σ_{rs} ā_{rs} D_{rs} − q with grid-mean
/// coefficients ā; D_{rs} are the same difference quotients as the operator.
class SpectralPreconditioner {
public:
    SpectralPreconditioner(const TorusGrid& grid, std::span<const double> mean_coeffs, double q) : grid_(grid)
    {
        const int dims = grid.real_dims();
        const int N = grid.N();
        const int half = N / 2 + 1;
        std::vector<int> shape(static_cast<std::size_t>(dims), N);
        shape.back() = N;  // FFTW row-major: last dimension fastest ↔ our axis 0
        complex_size_ = grid.points() / static_cast<std::size_t>(N) * static_cast<std::size_t>(half);
        real_ = fftw_alloc_real(grid.points());
        spec_ = fftw_alloc_complex(complex_size_);
        if (!real_ || !spec_) throw std::bad_alloc();
        forward_ = fftw_plan_dft_r2c(dims, shape.data(), real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r(dims, shape.data(), spec_, real_, FFTW_ESTIMATE);

        const double h = grid.spacing();
        const double inv_h2 = 1.0 / (h * h);
        inverse_symbol_.resize(complex_size_);
        const double scale = 1.0 / static_cast<double>(grid.points());
        auto A = [&](int r, int s) { return mean_coeffs[static_cast<std::size_t>(r * dims + s)]; };
        for (std::size_t c = 0; c < complex_size_; ++c) {
            // Complex layout: axis 0 fastest with N/2+1 entries, then axes 1..2n-1 with N each.
            std::array<double, 6> sin_t{};
            std::array<double, 6> diag{};
            std::size_t rest = c;
            for (int r = 0; r < dims; ++r) {
                const int len = r == 0 ? half : N;
                const int idx = static_cast<int>(rest % static_cast<std::size_t>(len));
                rest /= static_cast<std::size_t>(len);
                const int k = idx <= N / 2 ? idx : idx - N;
                const double theta = k * h;
                sin_t[static_cast<std::size_t>(r)] = std::sin(theta);
                const double s2 = std::sin(0.5 * theta);
                diag[static_cast<std::size_t>(r)] = -4.0 * s2 * s2;
            }
            double symbol = 0.0;
            for (int r = 0; r < dims; ++r) {
                symbol += A(r, r) * diag[static_cast<std::size_t>(r)];
                for (int s = r + 1; s < dims; ++s)
                    symbol -= 2.0 * A(r, s) * sin_t[static_cast<std::size_t>(r)] * sin_t[static_cast<std::size_t>(s)];
            }
            symbol = symbol * inv_h2 - q;
            if (std::abs(symbol) < 1e-14) symbol = -1.0;
            inverse_symbol_[c] = scale / symbol;
        }
    }

    SpectralPreconditioner(const SpectralPreconditioner&) = delete;
    SpectralPreconditioner& operator=(const SpectralPreconditioner&) = delete;

    ~SpectralPreconditioner()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    void apply(std::span<const double> r, std::span<double> out) const
    {
        std::copy(r.begin(), r.end(), real_);
        fftw_execute(forward_);
        for (std::size_t c = 0; c < complex_size_; ++c) {
            spec_[c][0] *= inverse_symbol_[c];
            spec_[c][1] *= inverse_symbol_[c];
        }
        fftw_execute(backward_);
        std::copy(real_, real_ + grid_.points(), out.begin());
    }

private:
    TorusGrid grid_;
    std::size_t complex_size_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
    std::vector<double> inverse_symbol_;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b)
{
    return deterministic_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace detail

/// Solves DG[v] = rhs to ‖DG[v] − rhs‖₂ <= tol ‖rhs‖₂ by restarted GMRES with
/// the chosen preconditioner. Throws LinearSolveError past the iteration cap.
[[nodiscard]] inline KrylovResult krylov_solve(const LinearizationField& L, const ScalarField& rhs,
                                               const KrylovOptions& opt = {})
{
    require(L.grid() == rhs.grid(), "krylov_solve: grid mismatch");
    require(opt.tol > 0.0 && opt.restart >= 1, "krylov_solve: bad options");
    const TorusGrid& grid = rhs.grid();
    const std::size_t size = grid.points();
    const int cap = opt.max_iterations > 0
                        ? opt.max_iterations
                        : static_cast<int>(10 * std::pow(static_cast<double>(grid.N()), grid.n()));

    KrylovResult result;
    result.solution = ScalarField(grid);
    result.rhs_norm = detail::norm2(rhs.values());
    if (result.rhs_norm == 0.0) return result;

    std::unique_ptr<SpectralPreconditioner> spectral;
    std::vector<double> inv_diag;
    if (opt.preconditioner == Preconditioner::Spectral) {
        const auto mean = L.mean_coefficients();
        spectral = std::make_unique<SpectralPreconditioner>(grid, mean, L.q());
    } else {
        inv_diag.resize(size);
        parallel_for(size, [&](std::size_t p) { inv_diag[p] = 1.0 / L.diagonal(p); });
    }
    auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (spectral) spectral->apply(in, out);
        else parallel_for(size, [&](std::size_t p) { out[p] = in[p] * inv_diag[p]; });
    };

    const int restart = opt.restart;
    std::vector<ScalarField> basis(static_cast<std::size_t>(restart) + 1, ScalarField(grid));
    ScalarField z(grid);
    ScalarField residual = rhs;
    double beta = result.rhs_norm;
    const double target = opt.tol * result.rhs_norm;
    std::vector<double> hess(static_cast<std::size_t>((restart + 1) * restart), 0.0);
    std::vector<double> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart));
    std::vector<double> g(static_cast<std::size_t>(restart) + 1);
    auto H = [&](int i, int j) -> double& { return hess[static_cast<std::size_t>(i * restart + j)]; };

    while (true) {
        auto& v0 = basis[0];
        parallel_for(size, [&](std::size_t p) { v0[p] = residual[p] / beta; });
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int j = 0;
        for (; j < restart; ++j) {
            precondition(basis[static_cast<std::size_t>(j)].values(), z.values());
            auto& w = basis[static_cast<std::size_t>(j) + 1];
            parallel_for(size, [&](std::size_t p) { w[p] = apply_linearization_at(L, z, p); });
            for (int i = 0; i <= j; ++i) {
                const auto& vi = basis[static_cast<std::size_t>(i)];
                const double hij = detail::dot(w.values(), vi.values());
                H(i, j) = hij;
                parallel_for(size, [&](std::size_t p) { w[p] -= hij * vi[p]; });
            }
            const double hnext = detail::norm2(w.values());
            H(j + 1, j) = hnext;
            if (hnext > 0.0) parallel_for(size, [&](std::size_t p) { w[p] /= hnext; });
            for (int i = 0; i < j; ++i) {
                const double a = H(i, j);
                const double b = H(i + 1, j);
                H(i, j) = cs[static_cast<std::size_t>(i)] * a + sn[static_cast<std::size_t>(i)] * b;
                H(i + 1, j) = -sn[static_cast<std::size_t>(i)] * a + cs[static_cast<std::size_t>(i)] * b;
            }
            const double a = H(j, j);
            const double b = H(j + 1, j);
            const double rho = std::hypot(a, b);
            cs[static_cast<std::size_t>(j)] = rho > 0.0 ? a / rho : 1.0;
            sn[static_cast<std::size_t>(j)] = rho > 0.0 ? b / rho : 0.0;
            H(j, j) = rho;
            H(j + 1, j) = 0.0;
            g[static_cast<std::size_t>(j) + 1] = -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
            g[static_cast<std::size_t>(j)] = cs[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
            ++result.iterations;
            if (std::abs(g[static_cast<std::size_t>(j) + 1]) <= target || hnext == 0.0 || result.iterations >= cap) {
                ++j;
                break;
            }
        }
        // Back substitution for y, then v += M^{-1} (V y).
        std::vector<double> y(static_cast<std::size_t>(j), 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[static_cast<std::size_t>(i)];
            for (int c = i + 1; c < j; ++c) s -= H(i, c) * y[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(i)] = s / H(i, i);
        }
        ScalarField combo(grid);
        parallel_for(size, [&](std::size_t p) {
            double s = 0.0;
            for (int i = 0; i < j; ++i) s += y[static_cast<std::size_t>(i)] * basis[static_cast<std::size_t>(i)][p];
            combo[p] = s;
        });
        precondition(combo.values(), z.values());
        parallel_for(size, [&](std::size_t p) { result.solution[p] += z[p]; });

        parallel_for(size, [&](std::size_t p) { residual[p] = rhs[p] - apply_linearization_at(L, result.solution, p); });
        beta = detail::norm2(residual.values());
        result.residual_norm = beta;
        if (beta <= target) return result;
        if (result.iterations >= cap)
            throw LinearSolveError("krylov_solve: iteration cap reached", result.iterations, beta / result.rhs_norm);
    }
}

[[nodiscard]] inline KrylovResult krylov_solve(const LinearizationField& L, const ScalarField& rhs, double tol)
{
    KrylovOptions opt;
    opt.tol = tol;
    return krylov_solve(L, rhs, opt);
}

} // namespace hessianlab
