// Derivative-free Nelder-Mead simplex maximizer with shrink-restart
// polishing. Used for the non-convex local-unitary fidelity search, where
// objective evaluations are cheap and gradients are not worth the code.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace ghzw {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

namespace detail {

inline NelderMeadResult nelder_mead_once(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x0, double initial_step,
                                         int max_iterations, double tolerance) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    int evals = 0;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        return f(x);
    };

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n) + 1, x0);
    std::vector<double> vals(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i) + 1](i) += initial_step;
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(pts.size());
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return vals[a] > vals[b]; });
        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[order.size() - 2];
        if (vals[best] - vals[worst] < tolerance) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < order.size() - 1; ++i) centroid += pts[order[i]];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd reflected = centroid + alpha * (centroid - pts[worst]);
        const double fr = eval(reflected);
        if (fr > vals[best]) {
            const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
            const double fe = eval(expanded);
            if (fe > fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr > vals[second_worst]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const Eigen::VectorXd contracted = centroid + rho * (pts[worst] - centroid);
        const double fc = eval(contracted);
        if (fc > vals[worst]) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i < order.size(); ++i) {
            pts[order[i]] = pts[order[0]] + sigma * (pts[order[i]] - pts[order[0]]);
            vals[order[i]] = eval(pts[order[i]]);
        }
    }

    const std::size_t best = static_cast<std::size_t>(
        std::max_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], iter, evals};
}

}  // namespace detail

// Maximize f starting at x0; restarts from the incumbent with a shrinking
// simplex until no further improvement.
inline NelderMeadResult nelder_mead_maximize(
    const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
    double initial_step = 0.5, int max_iterations = 4000, double tolerance = 1e-12) {
    NelderMeadResult best = detail::nelder_mead_once(f, x0, initial_step, max_iterations, tolerance);
    double step = initial_step * 0.1;
    for (int round = 0; round < 3; ++round, step *= 0.1) {
        NelderMeadResult next =
            detail::nelder_mead_once(f, best.x, step, max_iterations, tolerance);
        next.iterations += best.iterations;
        next.evaluations += best.evaluations;
        if (next.value <= best.value + 1e-13) {
            best.iterations = next.iterations;
            best.evaluations = next.evaluations;
            break;
        }
        best = std::move(next);
    }
    return best;
}

}  // namespace ghzw
