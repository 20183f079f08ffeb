#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hessianlab {

/// Thrown when an argument violates a documented precondition.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The form ω + dd^c u left the open cone Γ_m at some grid point.
class ConeBreachError : public std::runtime_error {
public:
    ConeBreachError(const std::string& what, std::size_t point, std::vector<double> lambda)
        : std::runtime_error(what), point_(point), lambda_(std::move(lambda)) {}

    [[nodiscard]] std::size_t point() const noexcept { return point_; }
    [[nodiscard]] const std::vector<double>& lambda() const noexcept { return lambda_; }

private:
    std::size_t point_;
    std::vector<double> lambda_;
};

/// The Krylov iteration hit its cap before reaching the requested tolerance.
class LinearSolveError : public std::runtime_error {
public:
    LinearSolveError(const std::string& what, int iterations, double relative_residual)
        : std::runtime_error(what), iterations_(iterations), relative_residual_(relative_residual) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] double relative_residual() const noexcept { return relative_residual_; }

private:
    int iterations_;
    double relative_residual_;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw InputError(message);
}

} // namespace hessianlab
