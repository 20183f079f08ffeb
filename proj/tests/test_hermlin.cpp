#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hessianlab/hermlin.hpp"

using namespace hessianlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

using Dense = std::vector<std::vector<cplx>>;

Dense to_dense(const CMatrix& a)
{
    Dense d(static_cast<std::size_t>(a.dim()), std::vector<cplx>(static_cast<std::size_t>(a.dim())));
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a(i, j);
    return d;
}

// Gaussian elimination with partial pivoting; returns det and overwrites b with a^{-1} b.
cplx eliminate(Dense a, Dense& b)
{
    const std::size_t n = a.size();
    cplx det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            std::swap(b[piv], b[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const cplx f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            for (std::size_t k = 0; k < b[r].size(); ++k) b[r][k] -= f * b[c][k];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        for (std::size_t k = 0; k < b[c].size(); ++k) {
            cplx s = b[c][k];
            for (std::size_t j = c + 1; j < n; ++j) s -= a[c][j] * b[j][k];
            b[c][k] = s / a[c][c];
        }
    }
    return det;
}

CMatrix random_matrix(int n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    CMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
}

HermitianForm random_hermitian(int n, std::mt19937_64& rng)
{
    const CMatrix a = random_matrix(n, rng);
    CMatrix h(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
    return HermitianForm::from_trusted(h);
}

HermitianForm random_positive(int n, std::mt19937_64& rng)
{
    const CMatrix a = random_matrix(n, rng);
    CMatrix p = a.adjoint() * a;
    for (int i = 0; i < n; ++i) p(i, i) += 0.5;
    return HermitianForm::from_trusted(p);
}

// Modified Gram-Schmidt on the columns of a random Gaussian matrix.
CMatrix random_unitary(int n, std::mt19937_64& rng)
{
    CMatrix q = random_matrix(n, rng);
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < c; ++k) {
            cplx d = 0.0;
            for (int r = 0; r < n; ++r) d += std::conj(q(r, k)) * q(r, c);
            for (int r = 0; r < n; ++r) q(r, c) -= d * q(r, k);
        }
        double nrm = 0.0;
        for (int r = 0; r < n; ++r) nrm += std::norm(q(r, c));
        nrm = std::sqrt(nrm);
        for (int r = 0; r < n; ++r) q(r, c) /= nrm;
    }
    return q;
}

} // namespace

TEST_CASE("standard eigenvalues on small examples", "[hermlin]")
{
    const auto id = eigenvalues_hermitian(HermitianForm::identity(3));
    REQUIRE(id.n == 3);
    for (double v : id.eigenvalues()) CHECK_THAT(v, WithinAbs(1.0, 1e-14));

    const auto d = eigenvalues_hermitian(HermitianForm::diagonal({5.0, -2.0}));
    CHECK(d.values[0] == 5.0);
    CHECK(d.values[1] == -2.0);

    const cplx i(0.0, 1.0);
    const auto s = eigenvalues_hermitian(HermitianForm(2, {2.0, i, -i, 2.0}));
    CHECK_THAT(s.values[0], WithinAbs(3.0, 1e-13));
    CHECK_THAT(s.values[1], WithinAbs(1.0, 1e-13));
}

TEST_CASE("non-Hermitian input is rejected", "[hermlin]")
{
    const cplx i(0.0, 1.0);
    CHECK_THROWS_AS(HermitianForm(2, {2.0, i, i, 2.0}), InputError);
    CHECK_THROWS_AS(HermitianForm(2, {cplx(1.0, 0.5), 0.0, 0.0, 1.0}), InputError);
    CHECK_THROWS_AS(HermitianForm(2, {1.0, 0.0, 0.0}), InputError);
    CHECK_NOTHROW(HermitianForm(2, {1.0, cplx(0.0, 1e-14), 0.0, 1.0}));
}

TEST_CASE("eigenpairs reconstruct random Hermitian matrices", "[hermlin]")
{
    std::mt19937_64 rng(2024);
    for (int n = 1; n <= 8; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            const HermitianForm a = random_hermitian(n, rng);
            const Spectrum s = eigenvalues_hermitian(a);
            for (int k = 1; k < n; ++k) CHECK(s.values[static_cast<std::size_t>(k - 1)] >= s.values[static_cast<std::size_t>(k)]);
            const double scale = a.matrix().frobenius_norm();
            double recon = 0.0;
            double ortho = 0.0;
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) {
                    cplx v = 0.0;
                    cplx g = 0.0;
                    for (int k = 0; k < n; ++k) {
                        v += s.frame(r, k) * s.values[static_cast<std::size_t>(k)] * std::conj(s.frame(c, k));
                        g += std::conj(s.frame(k, r)) * s.frame(k, c);
                    }
                    recon = std::max(recon, std::abs(v - a(r, c)));
                    ortho = std::max(ortho, std::abs(g - (r == c ? 1.0 : 0.0)));
                }
            CHECK(recon <= 1e-10 * std::max(1.0, scale));
            CHECK(ortho <= 1e-10);
        }
    }
}

TEST_CASE("generalized eigenvalues examples", "[hermlin]")
{
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 6; ++n) {
        const HermitianForm w = random_positive(n, rng);
        const Spectrum one = generalized_eigenvalues(w, w);
        for (double v : one.eigenvalues()) CHECK_THAT(v, WithinAbs(1.0, 1e-10));
        const Spectrum two = generalized_eigenvalues(2.0 * w, w);
        for (double v : two.eigenvalues()) CHECK_THAT(v, WithinAbs(2.0, 1e-10));
    }
    const Spectrum r = generalized_eigenvalues(HermitianForm::diagonal({4.0, 1.0}), HermitianForm::diagonal({2.0, 1.0}));
    CHECK_THAT(r.values[0], WithinAbs(2.0, 1e-14));
    CHECK_THAT(r.values[1], WithinAbs(1.0, 1e-14));
}

TEST_CASE("generalized problem with the identity metric is the standard one", "[hermlin]")
{
    std::mt19937_64 rng(6);
    for (int n = 1; n <= 8; ++n) {
        const HermitianForm g = random_hermitian(n, rng);
        const Spectrum a = generalized_eigenvalues(g, HermitianForm::identity(n));
        const Spectrum b = eigenvalues_hermitian(g);
        for (int k = 0; k < n; ++k) CHECK_THAT(a.values[static_cast<std::size_t>(k)], WithinAbs(b.values[static_cast<std::size_t>(k)], 1e-10));
    }
}

TEST_CASE("generalized frame is metric-orthonormal and solves g v = λ ω v", "[hermlin]")
{
    std::mt19937_64 rng(7);
    for (int n = 2; n <= 8; ++n) {
        const HermitianForm g = random_hermitian(n, rng);
        const HermitianForm w = random_positive(n, rng);
        const Spectrum s = generalized_eigenvalues(g, w);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                cplx ip = 0.0;
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c) ip += std::conj(s.frame(r, a)) * w(r, c) * s.frame(c, b);
                CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) <= 1e-10);
            }
        for (int k = 0; k < n; ++k) {
            double err = 0.0;
            for (int r = 0; r < n; ++r) {
                cplx lhs = 0.0;
                cplx rhs = 0.0;
                for (int c = 0; c < n; ++c) {
                    lhs += g(r, c) * s.frame(c, k);
                    rhs += w(r, c) * s.frame(c, k);
                }
                err = std::max(err, std::abs(lhs - s.values[static_cast<std::size_t>(k)] * rhs));
            }
            CHECK(err <= 1e-9 * std::max(1.0, g.matrix().frobenius_norm()));
        }
    }
}

TEST_CASE("eigenvalues are invariant under simultaneous unitary conjugation", "[hermlin]")
{
    std::mt19937_64 rng(8);
    for (int n = 2; n <= 8; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const HermitianForm g = random_hermitian(n, rng);
            const HermitianForm w = random_positive(n, rng);
            const CMatrix u = random_unitary(n, rng);
            const Spectrum a = generalized_eigenvalues(g, w);
            const Spectrum b = generalized_eigenvalues(g.congruence(u), w.congruence(u));
            for (int k = 0; k < n; ++k) {
                const double x = a.values[static_cast<std::size_t>(k)];
                CHECK(std::abs(x - b.values[static_cast<std::size_t>(k)]) <= 1e-9 * std::max(1.0, std::abs(x)));
            }
        }
    }
}

TEST_CASE("trace and determinant reconstruct from the generalized spectrum", "[hermlin]")
{
    std::mt19937_64 rng(9);
    for (int n = 1; n <= 8; ++n) {
        for (int trial = 0; trial < 5; ++trial) {
            const HermitianForm g = random_hermitian(n, rng);
            const HermitianForm w = random_positive(n, rng);
            Dense rhs = to_dense(g.matrix());
            const cplx det_w = eliminate(to_dense(w.matrix()), rhs);
            Dense none(static_cast<std::size_t>(n));
            const cplx det_g = eliminate(to_dense(g.matrix()), none);
            cplx trace = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) trace += rhs[i][i];

            const Spectrum s = generalized_eigenvalues(g, w);
            double sum = 0.0;
            double prod = 1.0;
            double sum_abs = 0.0;
            for (double v : s.eigenvalues()) {
                sum += v;
                prod *= v;
                sum_abs += std::abs(v);
            }
            CHECK(std::abs(sum - trace.real()) <= 1e-9 * std::max(1.0, sum_abs));
            const double ratio = (det_g / det_w).real();
            CHECK_THAT(prod, WithinRel(ratio, 1e-9));
        }
    }
    CHECK_THAT(determinant(HermitianForm::diagonal({2.0, -3.0, 0.5})), WithinAbs(-3.0, 1e-14));
}

TEST_CASE("metric must be positive definite", "[hermlin]")
{
    const HermitianForm g = HermitianForm::identity(2);
    CHECK_THROWS_AS(generalized_eigenvalues(g, HermitianForm::diagonal({1.0, 0.0})), InputError);
    CHECK_THROWS_AS(generalized_eigenvalues(g, HermitianForm::diagonal({1.0, -1.0})), InputError);
    CHECK_THROWS_AS(generalized_eigenvalues(g, HermitianForm(2, {1.0, 2.0, 2.0, 1.0})), InputError);
    CHECK_THROWS_AS(generalized_eigenvalues(HermitianForm::identity(3), HermitianForm::identity(2)), InputError);
}

TEST_CASE("(ω,m)-positivity", "[hermlin]")
{
    std::mt19937_64 rng(10);
    const HermitianForm w = random_positive(4, rng);
    for (int m = 1; m <= 4; ++m) CHECK(is_m_positive(w, w, m));
    const HermitianForm id = HermitianForm::identity(3);
    CHECK(is_m_positive(HermitianForm::diagonal({3.0, 2.0, -1.0}), id, 2));
    CHECK_FALSE(is_m_positive(HermitianForm::diagonal({3.0, 1.0, -1.0}), id, 2));
    CHECK(is_m_positive(HermitianForm::diagonal({3.0, 1.0, -1.0}), id, 1));
    CHECK_FALSE(is_m_positive(HermitianForm::diagonal({3.0, 2.0, -1.0}), id, 3));
    CHECK_THROWS_AS(is_m_positive(id, id, 0), InputError);
    CHECK_THROWS_AS(is_m_positive(id, id, 4), InputError);

    // Positivity is relative to ω: diag(1,-1) is 1-positive for ω = diag(1,4)
    // since the relative eigenvalues are (1, -1/4).
    CHECK(is_m_positive(HermitianForm::diagonal({1.0, -1.0}), HermitianForm::diagonal({1.0, 4.0}), 1));
    CHECK_FALSE(is_m_positive(HermitianForm::diagonal({1.0, -1.0}), HermitianForm::identity(2), 1));
}
