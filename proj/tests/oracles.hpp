// Test-only reference computations, kept independent of the library paths
// they check: plain quadrature, grid suprema and finite differences.
#ifndef RENOIR_TESTS_ORACLES_HPP
#define RENOIR_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <stdexcept>

#include "renoir/distributions.hpp"
#include "renoir/net.hpp"

namespace oracles {

// Composite Simpson rule; n is the (even) panel count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) throw std::invalid_argument("simpson needs an even panel count");
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

inline double gauss_pdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

// Total variation between two 1-D Gaussians with a shared sigma, by
// quadrature of |p1 - p2| / 2.
inline double tv_gaussian_1d(double m1, double m2, double sigma, int panels = 40000) {
    const double lo = std::min(m1, m2) - 12.0 * sigma;
    const double hi = std::max(m1, m2) + 12.0 * sigma;
    return 0.5 * simpson(
                     [&](double x) {
                         return std::abs(gauss_pdf(x, m1, sigma) - gauss_pdf(x, m2, sigma));
                     },
                     lo, hi, panels);
}

// sup over a d-dimensional grid of |log p(z - x) - log p(z - y)|.
inline double grid_sup_log_ratio(const renoir::NoiseModel& model, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y, double lo, double hi, int points) {
    const int d = model.dim();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Eigen::VectorXd z(d);
    double sup = 0.0;
    for (;;) {
        for (int j = 0; j < d; ++j)
            z(j) = lo + (hi - lo) * idx[static_cast<std::size_t>(j)] / (points - 1);
        sup = std::max(sup, std::abs(model.log_density(z - x) - model.log_density(z - y)));
        int j = 0;
        for (; j < d; ++j) {
            if (++idx[static_cast<std::size_t>(j)] < points) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j == d) break;
    }
    return sup;
}

// Central finite difference of the batch loss with respect to every weight
// and bias; returns the largest relative error against the analytic
// gradient. The noise draws are pinned by the seeds, so the loss is a
// smooth deterministic function of the weights.
inline double max_grad_rel_error(const renoir::RandomizedNet& net, const Eigen::MatrixXd& X,
                                 const std::vector<int>& y,
                                 const std::vector<std::uint64_t>& seeds, double step = 1e-4) {
    renoir::NetGradients grads;
    renoir::loss_and_grad(net, X, y, seeds, &grads);

    double worst = 0.0;
    renoir::RandomizedNet probe = net;
    auto check_entry = [&](double* slot, double analytic) {
        const double saved = *slot;
        *slot = saved + step;
        const double up = renoir::loss_and_grad(probe, X, y, seeds, nullptr);
        *slot = saved - step;
        const double down = renoir::loss_and_grad(probe, X, y, seeds, nullptr);
        *slot = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };

    auto& layers = probe.mutable_layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        auto* lin = std::get_if<renoir::LinearLayer>(&layers[i]);
        if (lin == nullptr) continue;
        for (int r = 0; r < lin->W.rows(); ++r)
            for (int c = 0; c < lin->W.cols(); ++c) check_entry(&lin->W(r, c), grads.dW[i](r, c));
        for (int r = 0; r < lin->b.size(); ++r) check_entry(&lin->b(r), grads.db[i](r));
    }
    return worst;
}

// Operator-norm lower bound for the (l2,l2) pair by scanning a fine grid
// of unit directions (2-D inputs only).
inline double sphere_grid_opnorm_2d(const Eigen::MatrixXd& W, int points = 20000) {
    double best = 0.0;
    for (int i = 0; i < points; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / points;
        const Eigen::Vector2d u(std::cos(a), std::sin(a));
        best = std::max(best, (W * u).norm());
    }
    return best;
}

}  // namespace oracles

#endif
