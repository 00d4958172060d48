#pragma once

// Central finite-difference oracle for gradient checks. Independent of the
// backward passes it verifies: it only re-runs forward passes at perturbed
// inputs/weights.

#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

inline double relative_error(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / denom;
}

// Largest relative error between analytic_grad and the central difference of
// `loss_at` over every coordinate of a parameter array accessed through
// get/set.
inline double max_grad_error(const std::function<double()>& loss_at,
                             const std::function<double(std::size_t)>& get,
                             const std::function<void(std::size_t, double)>& set,
                             const std::vector<double>& analytic_grad, double h = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic_grad.size(); ++i) {
        const double saved = get(i);
        set(i, saved + h);
        const double up = loss_at();
        set(i, saved - h);
        const double down = loss_at();
        set(i, saved);
        const double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, relative_error(analytic_grad[i], numeric));
    }
    return worst;
}

} // namespace testsupport
