#pragma once

// Periodic grids on [0,2π)^{2n} standing in for the flat torus C^n/Λ, sampled
// fields, trigonometric-polynomial field specs, second-order finite-difference
// complex Hessians u_{j k̄}, and Hermitian metric fields.

#include <bit>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hessianlab/error.hpp"
#include "hessianlab/hermlin.hpp"
#include "hessianlab/parallel.hpp"

namespace hessianlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// N points per real axis on 2n real axes ordered x_1, y_1, ..., x_n, y_n,
/// x_1 varying fastest in memory.
class TorusGrid {
public:
    static constexpr std::size_t kDefaultMemoryCap = std::size_t{2} << 30;

    TorusGrid() = default;
    TorusGrid(int n, int N, std::size_t memory_cap = kDefaultMemoryCap) : n_(n), N_(N)
    {
        require(n >= 2 && n <= 3, "TorusGrid: complex dimension n must be 2 or 3");
        require(N >= 8, "TorusGrid: need N >= 8 points per axis");
        require(N % 2 == 0, "TorusGrid: N must be even");
        points_ = 1;
        for (int r = 0; r < 2 * n; ++r) {
            strides_[static_cast<std::size_t>(r)] = points_;
            points_ *= static_cast<std::size_t>(N);
        }
        require(points_ * sizeof(double) <= memory_cap, "TorusGrid: N^(2n) points exceed the memory cap");
        h_ = kTwoPi / N;
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] int N() const noexcept { return N_; }
    [[nodiscard]] int real_dims() const noexcept { return 2 * n_; }
    [[nodiscard]] double spacing() const noexcept { return h_; }
    [[nodiscard]] std::size_t points() const noexcept { return points_; }
    [[nodiscard]] std::size_t stride(int axis) const noexcept { return strides_[static_cast<std::size_t>(axis)]; }
    /// Quadrature weight h^{2n} of one cell.
    [[nodiscard]] double cell_volume() const noexcept { return std::pow(h_, 2 * n_); }

    [[nodiscard]] int coordinate_index(std::size_t p, int axis) const noexcept
    {
        return static_cast<int>((p / strides_[static_cast<std::size_t>(axis)]) % static_cast<std::size_t>(N_));
    }

    /// Real coordinates of grid point p.
    void coordinates(std::size_t p, std::span<double> x) const
    {
        for (int r = 0; r < real_dims(); ++r) x[static_cast<std::size_t>(r)] = coordinate_index(p, r) * h_;
    }

    /// Grid point shifted by `shift` nodes along `axis`, with periodic wrap.
    [[nodiscard]] std::size_t shifted(std::size_t p, int axis, int shift) const
    {
        const int i = coordinate_index(p, axis);
        const int j = ((i + shift) % N_ + N_) % N_;
        return p + static_cast<std::size_t>(j - i) * strides_[static_cast<std::size_t>(axis)];
    }

    friend bool operator==(const TorusGrid& a, const TorusGrid& b) noexcept { return a.n_ == b.n_ && a.N_ == b.N_; }

private:
    int n_ = 0;
    int N_ = 0;
    double h_ = 0.0;
    std::size_t points_ = 0;
    std::array<std::size_t, 6> strides_{};
};

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const TorusGrid& grid, double value = 0.0) : grid_(grid), data_(grid.points(), value) {}
    ScalarField(const TorusGrid& grid, std::vector<double> data) : grid_(grid), data_(std::move(data))
    {
        require(data_.size() == grid_.points(), "ScalarField: data length does not match grid");
    }

    [[nodiscard]] const TorusGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
    [[nodiscard]] std::span<double> values() noexcept { return data_; }
    double& operator[](std::size_t p) noexcept { return data_[p]; }
    double operator[](std::size_t p) const noexcept { return data_[p]; }

    [[nodiscard]] double max() const { return parallel_max(size(), [&](std::size_t p) { return data_[p]; }); }
    [[nodiscard]] double min() const { return -parallel_max(size(), [&](std::size_t p) { return -data_[p]; }); }
    [[nodiscard]] double sup_norm() const
    {
        return parallel_max(size(), [&](std::size_t p) { return std::abs(data_[p]); });
    }
    [[nodiscard]] double mean() const
    {
        return deterministic_sum(size(), [&](std::size_t p) { return data_[p]; }) / static_cast<double>(size());
    }

    ScalarField& operator+=(double c)
    {
        for (auto& x : data_) x += c;
        return *this;
    }

private:
    TorusGrid grid_;
    std::vector<double> data_;
};

[[nodiscard]] inline ScalarField operator-(const ScalarField& a, const ScalarField& b)
{
    require(a.grid() == b.grid(), "field grid mismatch");
    ScalarField r(a.grid());
    for (std::size_t p = 0; p < a.size(); ++p) r[p] = a[p] - b[p];
    return r;
}

[[nodiscard]] inline ScalarField operator+(const ScalarField& a, const ScalarField& b)
{
    require(a.grid() == b.grid(), "field grid mismatch");
    ScalarField r(a.grid());
    for (std::size_t p = 0; p < a.size(); ++p) r[p] = a[p] + b[p];
    return r;
}

[[nodiscard]] inline ScalarField operator*(double s, const ScalarField& a)
{
    ScalarField r(a.grid());
    for (std::size_t p = 0; p < a.size(); ++p) r[p] = s * a[p];
    return r;
}

// ---------------------------------------------------------------------------
// Trigonometric polynomial specs

/// amplitude · cos(k·x) or amplitude · sin(k·x), k ∈ Z^{2n} over (x_1, y_1, ..., x_n, y_n).
struct FourierTerm {
    enum class Kind { Cos, Sin };
    Kind kind = Kind::Cos;
    std::vector<int> frequency;
    double amplitude = 0.0;

    [[nodiscard]] int frequency_at(int axis) const
    {
        return axis < static_cast<int>(frequency.size()) ? frequency[static_cast<std::size_t>(axis)] : 0;
    }

    [[nodiscard]] double phase(std::span<const double> x) const
    {
        double s = 0.0;
        for (std::size_t r = 0; r < frequency.size(); ++r) s += frequency[r] * x[r];
        return s;
    }
};

/// A sum of Fourier terms. Parsed from "kind:freq-vector:amplitude" items joined
/// by ';' (or '+'), e.g. "cos:1,0,0,0:0.5;sin:0,0,1,1:-0.1;const::0.2".
struct FieldSpec {
    std::vector<FourierTerm> terms;

    [[nodiscard]] static FieldSpec parse(const std::string& text)
    {
        FieldSpec spec;
        std::vector<std::string> items;
        std::string current;
        for (std::size_t i = 0; i < text.size(); ++i) {
            const char c = text[i];
            const bool plus_sep = c == '+' && i + 1 < text.size() && std::isalpha(static_cast<unsigned char>(text[i + 1]));
            if (c == ';' || plus_sep) {
                items.push_back(current);
                current.clear();
            } else if (!std::isspace(static_cast<unsigned char>(c))) {
                current.push_back(c);
            }
        }
        items.push_back(current);
        for (const auto& item : items) {
            if (item.empty()) continue;
            const auto c1 = item.find(':');
            const auto c2 = item.find(':', c1 == std::string::npos ? c1 : c1 + 1);
            require(c1 != std::string::npos && c2 != std::string::npos,
                    "field spec: expected kind:freq-vector:amplitude, got '" + item + "'");
            const std::string kind = item.substr(0, c1);
            const std::string freq = item.substr(c1 + 1, c2 - c1 - 1);
            const std::string amp = item.substr(c2 + 1);
            FourierTerm term;
            if (kind == "cos" || kind == "const") term.kind = FourierTerm::Kind::Cos;
            else if (kind == "sin") term.kind = FourierTerm::Kind::Sin;
            else throw InputError("field spec: unknown kind '" + kind + "'");
            if (!freq.empty()) {
                std::stringstream ss(freq);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    try {
                        std::size_t used = 0;
                        term.frequency.push_back(std::stoi(tok, &used));
                        require(used == tok.size(), "field spec: bad frequency '" + tok + "'");
                    } catch (const std::logic_error&) {
                        throw InputError("field spec: bad frequency '" + tok + "'");
                    }
                }
            }
            require(kind != "const" || freq.empty(), "field spec: const takes no frequency vector");
            try {
                std::size_t used = 0;
                term.amplitude = std::stod(amp, &used);
                require(used == amp.size(), "field spec: bad amplitude '" + amp + "'");
            } catch (const std::logic_error&) {
                throw InputError("field spec: bad amplitude '" + amp + "'");
            }
            spec.terms.push_back(std::move(term));
        }
        return spec;
    }

    [[nodiscard]] std::string to_string() const
    {
        std::ostringstream os;
        os.precision(17);
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (t) os << ';';
            const auto& term = terms[t];
            os << (term.kind == FourierTerm::Kind::Cos ? "cos" : "sin") << ':';
            for (std::size_t r = 0; r < term.frequency.size(); ++r) os << (r ? "," : "") << term.frequency[r];
            os << ':' << term.amplitude;
        }
        return os.str();
    }

    [[nodiscard]] FieldSpec scaled(double s) const
    {
        FieldSpec r = *this;
        for (auto& t : r.terms) t.amplitude *= s;
        return r;
    }

    [[nodiscard]] double value(std::span<const double> x) const
    {
        double v = 0.0;
        for (const auto& t : terms) {
            const double ph = t.phase(x);
            v += t.amplitude * (t.kind == FourierTerm::Kind::Cos ? std::cos(ph) : std::sin(ph));
        }
        return v;
    }

    /// ∂_r∂_s of the trigonometric polynomial at x (2n×2n, row-major into `out`).
    void second_derivatives(std::span<const double> x, int dims, std::span<double> out) const
    {
        std::fill(out.begin(), out.begin() + dims * dims, 0.0);
        for (const auto& t : terms) {
            const double ph = t.phase(x);
            const double base = -t.amplitude * (t.kind == FourierTerm::Kind::Cos ? std::cos(ph) : std::sin(ph));
            for (int r = 0; r < dims; ++r)
                for (int s = 0; s < dims; ++s)
                    out[static_cast<std::size_t>(r * dims + s)] += base * t.frequency_at(r) * t.frequency_at(s);
        }
    }
};

namespace detail {

inline void validate_spec(const FieldSpec& spec, const TorusGrid& grid)
{
    for (const auto& t : spec.terms) {
        require(static_cast<int>(t.frequency.size()) <= grid.real_dims(),
                "field spec: frequency vector longer than 2n = " + std::to_string(grid.real_dims()));
        for (int k : t.frequency)
            require(std::abs(k) <= grid.N() / 4,
                    "field spec: frequency " + std::to_string(k) + " exceeds N/4 (aliasing guard)");
        require(std::isfinite(t.amplitude), "field spec: non-finite amplitude");
    }
}

// u_{j k̄} = ¼[(∂_{x_j x_k} + ∂_{y_j y_k}) + i(∂_{x_j y_k} − ∂_{y_j x_k})] from the real 2n×2n Hessian.
inline void complex_from_real_hessian(std::span<const double> d, int n, std::span<cplx> out)
{
    const int dims = 2 * n;
    auto D = [&](int r, int s) { return d[static_cast<std::size_t>(r * dims + s)]; };
    for (int j = 0; j < n; ++j) {
        out[static_cast<std::size_t>(j * n + j)] = 0.25 * (D(2 * j, 2 * j) + D(2 * j + 1, 2 * j + 1));
        for (int k = j + 1; k < n; ++k) {
            const cplx v(0.25 * (D(2 * j, 2 * k) + D(2 * j + 1, 2 * k + 1)),
                         0.25 * (D(2 * j, 2 * k + 1) - D(2 * j + 1, 2 * k)));
            out[static_cast<std::size_t>(j * n + k)] = v;
            out[static_cast<std::size_t>(k * n + j)] = std::conj(v);
        }
    }
}

} // namespace detail

/// Samples a trigonometric polynomial at the grid nodes. Frequencies above N/4
/// along any axis are rejected.
[[nodiscard]] inline ScalarField make_field(const TorusGrid& grid, const FieldSpec& spec)
{
    detail::validate_spec(spec, grid);
    ScalarField f(grid);
    parallel_for(grid.points(), [&](std::size_t p) {
        std::array<double, 6> x{};
        grid.coordinates(p, x);
        f[p] = spec.value(std::span<const double>(x.data(), static_cast<std::size_t>(grid.real_dims())));
    });
    return f;
}

// ---------------------------------------------------------------------------
// Finite differences

/// Neighbour offsets of one grid point along every axis, with periodic wrap.
struct Stencil {
    std::array<std::ptrdiff_t, 6> plus{};
    std::array<std::ptrdiff_t, 6> minus{};

    Stencil(const TorusGrid& grid, std::size_t p)
    {
        const int N = grid.N();
        for (int r = 0; r < grid.real_dims(); ++r) {
            const auto stride = static_cast<std::ptrdiff_t>(grid.stride(r));
            const int i = grid.coordinate_index(p, r);
            plus[static_cast<std::size_t>(r)] = i == N - 1 ? -(N - 1) * stride : stride;
            minus[static_cast<std::size_t>(r)] = i == 0 ? (N - 1) * stride : -stride;
        }
    }
};

/// Central second differences ∂_r∂_s u at p into `out` (2n×2n row-major):
/// three-point rule on the diagonal, four-point cross rule off it.
inline void second_differences(const ScalarField& u, std::size_t p, std::span<double> out)
{
    const TorusGrid& g = u.grid();
    const int dims = g.real_dims();
    const Stencil st(g, p);
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const double* base = u.values().data() + p;
    const double center = *base;
    for (int r = 0; r < dims; ++r) {
        const auto pr = st.plus[static_cast<std::size_t>(r)];
        const auto mr = st.minus[static_cast<std::size_t>(r)];
        out[static_cast<std::size_t>(r * dims + r)] = (base[pr] - 2.0 * center + base[mr]) * inv_h2;
        for (int s = r + 1; s < dims; ++s) {
            const auto ps = st.plus[static_cast<std::size_t>(s)];
            const auto ms = st.minus[static_cast<std::size_t>(s)];
            const double v = (base[pr + ps] - base[pr + ms] - base[mr + ps] + base[mr + ms]) * (0.25 * inv_h2);
            out[static_cast<std::size_t>(r * dims + s)] = v;
            out[static_cast<std::size_t>(s * dims + r)] = v;
        }
    }
}

/// Discrete complex Hessian u_{j k̄} at one point (n×n row-major into `out`).
inline void complex_hessian_at(const ScalarField& u, std::size_t p, std::span<cplx> out)
{
    std::array<double, 36> d{};
    second_differences(u, p, d);
    detail::complex_from_real_hessian(d, u.grid().n(), out);
}

/// A field of n×n Hermitian matrices, n² complex entries per point.
class HessianField {
public:
    explicit HessianField(const TorusGrid& grid)
        : grid_(grid), data_(grid.points() * static_cast<std::size_t>(grid.n() * grid.n()))
    {
    }

    [[nodiscard]] const TorusGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<cplx> at_raw(std::size_t p)
    {
        const auto nn = static_cast<std::size_t>(grid_.n() * grid_.n());
        return {data_.data() + p * nn, nn};
    }
    [[nodiscard]] std::span<const cplx> at_raw(std::size_t p) const
    {
        const auto nn = static_cast<std::size_t>(grid_.n() * grid_.n());
        return {data_.data() + p * nn, nn};
    }
    [[nodiscard]] HermitianForm at(std::size_t p) const
    {
        const int n = grid_.n();
        CMatrix m(n);
        const auto raw = at_raw(p);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = raw[static_cast<std::size_t>(i * n + j)];
        return HermitianForm::from_trusted(m);
    }

private:
    TorusGrid grid_;
    std::vector<cplx> data_;
};

/// dd^c u on the grid by second-order central differences; Hermitian by construction.
[[nodiscard]] inline HessianField complex_hessian(const ScalarField& u)
{
    HessianField out(u.grid());
    parallel_for(u.size(), [&](std::size_t p) { complex_hessian_at(u, p, out.at_raw(p)); });
    return out;
}

/// Exact u_{j k̄} of a trigonometric polynomial at grid point p.
[[nodiscard]] inline HermitianForm analytic_complex_hessian(const FieldSpec& spec, const TorusGrid& grid, std::size_t p)
{
    const int dims = grid.real_dims();
    std::array<double, 6> x{};
    grid.coordinates(p, x);
    std::array<double, 36> d{};
    spec.second_derivatives(std::span<const double>(x.data(), static_cast<std::size_t>(dims)), dims, d);
    std::array<cplx, 9> raw{};
    detail::complex_from_real_hessian(d, grid.n(), raw);
    return HermitianForm(grid.n(), std::span<const cplx>(raw.data(), static_cast<std::size_t>(grid.n() * grid.n())));
}

/// max over the grid of the Euclidean norm of the central-difference gradient.
[[nodiscard]] inline double gradient_sup(const ScalarField& u)
{
    const TorusGrid& g = u.grid();
    const double inv_2h = 0.5 / g.spacing();
    return parallel_max(u.size(), [&](std::size_t p) {
        const Stencil st(g, p);
        const double* base = u.values().data() + p;
        double s = 0.0;
        for (int r = 0; r < g.real_dims(); ++r) {
            const double d = (base[st.plus[static_cast<std::size_t>(r)]] - base[st.minus[static_cast<std::size_t>(r)]]) * inv_2h;
            s += d * d;
        }
        return std::sqrt(s);
    });
}

// ---------------------------------------------------------------------------
// Metric fields

/// ω(x) = base + Σ_t term_t(x) · coefficient_t, kept for reproducibility.
struct MetricGenerator {
    HermitianForm base;
    std::vector<std::pair<FourierTerm, HermitianForm>> terms;
};

/// A Hermitian metric on the grid: one constant form, or one form per point.
class MetricField {
public:
    [[nodiscard]] static MetricField constant(const TorusGrid& grid, const HermitianForm& omega)
    {
        require(omega.dim() == grid.n(), "MetricField: form dimension must equal n");
        (void)MetricFactor(omega);  // throws unless positive definite
        MetricField f;
        f.grid_ = grid;
        f.constant_ = true;
        f.value_ = omega;
        f.generator_.base = omega;
        return f;
    }

    [[nodiscard]] static MetricField flat(const TorusGrid& grid) { return constant(grid, HermitianForm::identity(grid.n())); }

    [[nodiscard]] static MetricField from_generator(const TorusGrid& grid, const MetricGenerator& gen)
    {
        require(gen.base.dim() == grid.n(), "MetricField: form dimension must equal n");
        if (gen.terms.empty()) return constant(grid, gen.base);
        FieldSpec probe;
        for (const auto& [term, coeff] : gen.terms) {
            require(coeff.dim() == grid.n(), "MetricField: coefficient dimension must equal n");
            probe.terms.push_back(term);
        }
        detail::validate_spec(probe, grid);
        MetricField f;
        f.grid_ = grid;
        f.constant_ = false;
        f.generator_ = gen;
        f.value_ = gen.base;
        const int n = grid.n();
        const auto nn = static_cast<std::size_t>(n * n);
        f.data_.resize(grid.points() * nn);
        std::vector<char> bad(grid.points(), 0);
        parallel_for(grid.points(), [&](std::size_t p) {
            std::array<double, 6> x{};
            grid.coordinates(p, x);
            CMatrix m = gen.base.matrix();
            for (const auto& [term, coeff] : gen.terms) {
                const double ph = term.phase(std::span<const double>(x.data(), static_cast<std::size_t>(grid.real_dims())));
                const double w = term.amplitude * (term.kind == FourierTerm::Kind::Cos ? std::cos(ph) : std::sin(ph));
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) m(i, j) += w * coeff(i, j);
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) f.data_[p * nn + static_cast<std::size_t>(i * n + j)] = m(i, j);
            try {
                (void)MetricFactor(HermitianForm::from_trusted(m));
            } catch (const InputError&) {
                bad[p] = 1;
            }
        });
        for (std::size_t p = 0; p < bad.size(); ++p)
            require(!bad[p], "MetricField: metric not positive definite at grid point " + std::to_string(p));
        return f;
    }

    [[nodiscard]] const TorusGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] bool is_constant() const noexcept { return constant_; }
    [[nodiscard]] const MetricGenerator& generator() const noexcept { return generator_; }

    [[nodiscard]] HermitianForm at(std::size_t p) const
    {
        if (constant_) return value_;
        const int n = grid_.n();
        const auto nn = static_cast<std::size_t>(n * n);
        CMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = data_[p * nn + static_cast<std::size_t>(i * n + j)];
        return HermitianForm::from_trusted(m);
    }

private:
    TorusGrid grid_;
    bool constant_ = true;
    HermitianForm value_;
    MetricGenerator generator_;
    std::vector<cplx> data_;
};

/// Diagnostic: sup over the grid of |∂_{z_j} ω_{l k̄} − ∂_{z_l} ω_{j k̄}|, the
/// (2,1)-part of dω. Zero for constant (Kähler) metrics.
[[nodiscard]] inline double metric_torsion_sup(const MetricField& omega)
{
    if (omega.is_constant()) return 0.0;
    const TorusGrid& g = omega.grid();
    const int n = g.n();
    const double inv_2h = 0.5 / g.spacing();
    return parallel_max(g.points(), [&](std::size_t p) {
        // ∂_{z_j} = ½(∂_{x_j} − i ∂_{y_j})
        auto dz = [&](int j, int l, int k) {
            const HermitianForm xp = omega.at(g.shifted(p, 2 * j, 1));
            const HermitianForm xm = omega.at(g.shifted(p, 2 * j, -1));
            const HermitianForm yp = omega.at(g.shifted(p, 2 * j + 1, 1));
            const HermitianForm ym = omega.at(g.shifted(p, 2 * j + 1, -1));
            const cplx dx = (xp(l, k) - xm(l, k)) * inv_2h;
            const cplx dy = (yp(l, k) - ym(l, k)) * inv_2h;
            return 0.5 * (dx - cplx(0.0, 1.0) * dy);
        };
        double worst = 0.0;
        for (int j = 0; j < n; ++j)
            for (int l = j + 1; l < n; ++l)
                for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(dz(j, l, k) - dz(l, j, k)));
        return worst;
    });
}

// ---------------------------------------------------------------------------
// Field files: one JSON header line {"N","kind","n"} then N^{2n} little-endian float64.

inline void write_field(const std::string& path, const ScalarField& f, const std::string& kind = "scalar")
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("write_field: cannot open " + path);
    const nlohmann::json header = {{"n", f.grid().n()}, {"N", f.grid().N()}, {"kind", kind}};
    out << header.dump() << '\n';
    std::vector<unsigned char> bytes(f.size() * sizeof(double));
    for (std::size_t p = 0; p < f.size(); ++p) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(f[p]);
        for (int b = 0; b < 8; ++b) bytes[p * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write_field: write failed for " + path);
}

struct FieldFile {
    ScalarField field;
    std::string kind;
};

[[nodiscard]] inline FieldFile read_field(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("read_field: cannot open " + path);
    std::string line;
    std::getline(in, line);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("read_field: bad header: ") + e.what());
    }
    require(header.contains("n") && header.contains("N") && header.contains("kind"), "read_field: header needs n, N, kind");
    const TorusGrid grid(header["n"].get<int>(), header["N"].get<int>());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(bytes.size() == grid.points() * sizeof(double),
            "read_field: payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                std::to_string(grid.points() * sizeof(double)));
    std::vector<double> data(grid.points());
    for (std::size_t p = 0; p < data.size(); ++p) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[p * 8 + static_cast<std::size_t>(b)]) << (8 * b);
        data[p] = std::bit_cast<double>(bits);
    }
    return {ScalarField(grid, std::move(data)), header["kind"].get<std::string>()};
}

} // namespace hessianlab
