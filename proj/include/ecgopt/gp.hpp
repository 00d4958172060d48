#pragma once

#include <cstdint>
#include <vector>

namespace ecgopt {

// Matern-5/2 kernel with one lengthscale per input dimension.
struct KernelParams {
    double signal_variance = 1.0;
    std::vector<double> lengthscales;
    double noise_variance = 1e-6;
};

double kernel_value(const std::vector<double>& a, const std::vector<double>& b,
                    const KernelParams& kernel);

// Cross-covariance matrix; exactly symmetric when X == X2. Noise is not
// included here, it enters only on the Gram diagonal during fitting.
std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>>& X,
                                               const std::vector<std::vector<double>>& X2,
                                               const KernelParams& kernel);

struct GpOptions {
    int restarts = 8; // multistart count for the likelihood search
    bool standardize = true;
    double noise_lo = 1e-8, noise_hi = 1e-2;
    double lengthscale_lo = 1e-2, lengthscale_hi = 10.0;
    double signal_lo = 1e-6, signal_hi = 100.0;
    std::uint64_t seed = 0;
};

struct GpPosterior {
    double mean;
    double variance;     // floored at zero
    double raw_variance; // before flooring, for diagnostics
};

// Gaussian-process regression over the unit hypercube. Targets are
// standardized internally; posteriors are reported in the original units.
// A fitted model is immutable and safe for concurrent posterior queries.
class GpModel {
public:
    GpModel() = default;

    // Maximizes the log marginal likelihood over the kernel hyperparameters
    // by multistart coordinate search in log space.
    static GpModel fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       const GpOptions& opts = {});

    // Conditions on the data with the kernel given as-is.
    static GpModel fit_fixed(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y, const KernelParams& kernel,
                             bool standardize = true);

    bool fitted() const { return !x_.empty(); }
    GpPosterior posterior(const std::vector<double>& x) const;

    // Log marginal likelihood of the internally scaled targets.
    double log_marginal_likelihood() const;

    const KernelParams& kernel() const { return kernel_; }
    const std::vector<std::vector<double>>& inputs() const { return x_; }
    int size() const { return static_cast<int>(x_.size()); }

    double target_mean() const { return y_mean_; }
    double target_scale() const { return y_scale_; }
    double applied_jitter() const { return jitter_; }
    double min_target() const; // smallest observed y, original units

private:
    static GpModel build(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                         const KernelParams& kernel, bool standardize);

    std::vector<std::vector<double>> x_;
    std::vector<double> y_scaled_;
    std::vector<double> alpha_;
    std::vector<double> chol_; // n x n row-major lower factor of K + (noise + jitter) I
    KernelParams kernel_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    double jitter_ = 0.0;
    double lml_ = 0.0;
};

} // namespace ecgopt
