#include "holemem/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace holemem {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double inf = std::numeric_limits<double>::infinity();

struct Evaluator {
    const LeastSquaresProblem& problem;
    std::vector<double> r;
    std::vector<double> jac;

    explicit Evaluator(const LeastSquaresProblem& p, std::size_t num_params)
        : problem(p), r(p.num_residuals), jac(p.num_residuals * num_params) {}

    // half sum of squares, +inf outside the domain
    double cost(std::span<const double> x) {
        if (!problem.residuals(x, r)) return inf;
        double acc = 0.0;
        for (double v : r) {
            if (!std::isfinite(v)) return inf;
            acc += v * v;
        }
        return 0.5 * acc;
    }

    // Analytic Jacobian when supplied, central differences otherwise.
    void jacobian(std::span<const double> x) {
        if (problem.jacobian) {
            problem.jacobian(x, jac);
            return;
        }
        const std::size_t m = problem.num_residuals;
        const std::size_t p = x.size();
        std::vector<double> xs(x.begin(), x.end()), rp(m), rm(m);
        for (std::size_t k = 0; k < p; ++k) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
            xs[k] = x[k] + h;
            const bool up = problem.residuals(xs, rp);
            xs[k] = x[k] - h;
            const bool down = problem.residuals(xs, rm);
            xs[k] = x[k];
            double span = 2.0 * h;
            if (!up || !down) {
                // one-sided next to a domain boundary
                problem.residuals(x, up ? rm : rp);
                span = h;
            }
            for (std::size_t i = 0; i < m; ++i)
                jac[i * p + k] = up || down ? (rp[i] - rm[i]) / span : 0.0;
        }
    }
};

FitReport make_report(Evaluator& ev, std::span<const double> x, int iterations, bool fallback) {
    const std::size_t m = ev.problem.num_residuals;
    const std::size_t p = x.size();
    const double c = ev.cost(x);
    ev.jacobian(x);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> J(
        ev.jac.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
    const MatrixXd jtj = J.transpose() * J;
    const double s2 = m > p ? 2.0 * c / static_cast<double>(m - p) : 0.0;
    MatrixXd cov = MatrixXd::Constant(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p),
                                      std::numeric_limits<double>::quiet_NaN());
    Eigen::FullPivLU<MatrixXd> lu(jtj);
    if (lu.isInvertible()) cov = s2 * lu.inverse();

    FitReport rep;
    rep.residual_norm = std::sqrt(2.0 * c);
    rep.num_parameters = p;
    rep.iterations = iterations;
    rep.used_fallback = fallback;
    rep.covariance.resize(p * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            rep.covariance[i * p + j] =
                cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return rep;
}

}  // namespace

std::vector<double> nelder_mead(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x0, int max_evaluations, double tolerance,
                                bool& converged) {
    const std::size_t p = x0.size();
    std::vector<std::vector<double>> simplex(p + 1, x0);
    for (std::size_t i = 0; i < p; ++i) {
        const double step = x0[i] != 0.0 ? 0.05 * x0[i] : 0.00025;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(p + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    for (std::size_t i = 0; i <= p; ++i) values[i] = eval(simplex[i]);

    converged = false;
    std::vector<std::size_t> order(p + 1);
    while (evals < max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[p - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= p; ++i)
            for (std::size_t k = 0; k < p; ++k)
                size = std::max(size, std::abs(simplex[i][k] - simplex[best][k]) /
                                          (std::abs(simplex[best][k]) + tolerance));
        if (size < tolerance) {
            converged = true;
            break;
        }

        std::vector<double> centroid(p, 0.0);
        for (std::size_t i = 0; i <= p; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < p; ++k) centroid[k] += simplex[i][k] / double(p);
        auto along = [&](double t) {
            std::vector<double> x(p);
            for (std::size_t k = 0; k < p; ++k)
                x[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return x;
        };

        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < values[best]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = std::move(xe);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(xr);
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = std::move(xr);
            values[worst] = fr;
        } else {
            auto xc = fr < values[worst] ? along(-0.5) : along(0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, values[worst])) {
                simplex[worst] = std::move(xc);
                values[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= p; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < p; ++k)
                        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                    values[i] = eval(simplex[i]);
                }
            }
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    return simplex[static_cast<std::size_t>(it - values.begin())];
}

LeastSquaresSolution solve_least_squares(const LeastSquaresProblem& problem,
                                         std::vector<double> x0, const FitOptions& options) {
    const std::size_t m = problem.num_residuals;
    const std::size_t p = x0.size();
    Evaluator ev(problem, p);

    std::vector<double> x = std::move(x0);
    double cost = ev.cost(x);
    if (!std::isfinite(cost)) throw FitError("least squares: initial point is not admissible", x);

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    std::vector<double> trial(p);
    while (iter < options.max_iterations) {
        ++iter;
        ev.jacobian(x);
        problem.residuals(x, ev.r);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> J(
            ev.jac.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
        Eigen::Map<const VectorXd> r(ev.r.data(), static_cast<Eigen::Index>(m));
        const MatrixXd jtj = J.transpose() * J;
        const VectorXd grad = J.transpose() * r;
        if (cost == 0.0 || grad.lpNorm<Eigen::Infinity>() == 0.0) {
            converged = true;
            break;
        }

        bool accepted = false;
        bool tiny_step = false;
        for (int tries = 0; tries < 30; ++tries) {
            MatrixXd a = jtj;
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                a(i, i) += lambda * std::max(jtj(i, i), 1e-300);
            const VectorXd delta = a.ldlt().solve(-grad);
            double step_rel = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                trial[k] = x[k] + delta(static_cast<Eigen::Index>(k));
                step_rel = std::max(step_rel, std::abs(delta(static_cast<Eigen::Index>(k))) /
                                                  (std::abs(x[k]) + options.step_tolerance));
            }
            const double c = ev.cost(trial);
            if (c <= cost) {
                tiny_step = step_rel < options.step_tolerance;
                x = trial;
                cost = c;
                lambda = std::max(lambda * 0.1, 1e-12);
                accepted = true;
                break;
            }
            if (step_rel < options.step_tolerance) {
                // no admissible decrease at machine-precision step sizes
                tiny_step = true;
                break;
            }
            lambda *= 10.0;
        }
        if (tiny_step) {
            converged = true;
            break;
        }
        if (!accepted) break;
    }

    if (converged) return {x, make_report(ev, x, iter, false)};

    bool nm_converged = false;
    auto f = [&](std::span<const double> v) { return ev.cost(v); };
    auto best = nelder_mead(f, x, 4000 * static_cast<int>(p), 1e-12, nm_converged);
    if (!nm_converged) {
        if (ev.cost(best) > cost) best = x;
        throw FitError("least squares: no convergence after " + std::to_string(iter) +
                           " iterations and simplex fallback",
                       best);
    }
    return {best, make_report(ev, best, iter, true)};
}

}  // namespace holemem
