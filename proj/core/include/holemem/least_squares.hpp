#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "holemem/errors.hpp"

namespace holemem {

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-13;  ///< relative parameter change for convergence
};

struct FitReport {
    double residual_norm = 0.0;      ///< ||r||_2 at the solution
    std::vector<double> covariance;  ///< p x p, row-major: s^2 (J^T J)^-1
    std::size_t num_parameters = 0;
    int iterations = 0;
    bool used_fallback = false;      ///< solution came from the simplex search

    double variance(std::size_t i) const { return covariance.at(i * num_parameters + i); }
};

/// Fit did not converge. Carries the best parameters seen.
class FitError : public NumericalError {
public:
    FitError(const std::string& what, std::vector<double> best)
        : NumericalError(what), best_(std::move(best)) {}
    const std::vector<double>& best_parameters() const noexcept { return best_; }

private:
    std::vector<double> best_;
};

/// r(x) for m residuals. Return false if x is outside the admissible domain.
using ResidualFn = std::function<bool(std::span<const double> x, std::span<double> r)>;
/// Row-major m x p Jacobian of r at x.
using JacobianFn = std::function<void(std::span<const double> x, std::span<double> jac)>;

struct LeastSquaresProblem {
    std::size_t num_residuals = 0;
    ResidualFn residuals;
    JacobianFn jacobian;  ///< optional; central differences when empty
};

struct LeastSquaresSolution {
    std::vector<double> parameters;
    FitReport report;
};

/// Levenberg-Marquardt (damped Gauss-Newton). If it stalls or runs out of
/// iterations, a Nelder-Mead search on the sum of squares takes over from the
/// best point found. Throws FitError if neither converges.
LeastSquaresSolution solve_least_squares(const LeastSquaresProblem& problem,
                                         std::vector<double> x0, const FitOptions& options);

/// Derivative-free minimization of f. Returns the best vertex; `converged`
/// is set when the simplex shrank below `tolerance` (relative).
std::vector<double> nelder_mead(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x0, int max_evaluations, double tolerance,
                                bool& converged);

}  // namespace holemem
