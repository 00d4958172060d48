#include "ecgopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "ecgopt/errors.hpp"
#include "ecgopt/rng.hpp"

namespace ecgopt {

namespace {

void validate_kernel(const KernelParams& k) {
    if (k.signal_variance <= 0.0) throw ConfigError("kernel signal variance must be > 0");
    if (k.noise_variance <= 0.0) throw ConfigError("kernel noise variance must be > 0");
    if (k.lengthscales.empty()) throw ConfigError("kernel needs at least one lengthscale");
    for (double l : k.lengthscales)
        if (l <= 0.0) throw ConfigError("kernel lengthscales must be > 0");
}

double scaled_distance(const std::vector<double>& a, const std::vector<double>& b,
                       const KernelParams& k) {
    double r2 = 0.0;
    for (std::size_t d = 0; d < k.lengthscales.size(); ++d) {
        const double u = (a[d] - b[d]) / k.lengthscales[d];
        r2 += u * u;
    }
    return std::sqrt(r2);
}

constexpr double kSqrt5 = 2.23606797749978969;

double matern52(double r, double signal_variance) {
    const double s = kSqrt5 * r;
    return signal_variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

struct Factorization {
    Eigen::MatrixXd chol; // lower
    Eigen::VectorXd alpha;
    double jitter;
    double lml;
};

// Cholesky of K + (noise + jitter) I with the jitter ladder 1e-10 .. 1e-4.
std::optional<Factorization> factorize(const std::vector<std::vector<double>>& X,
                                       const Eigen::VectorXd& y, const KernelParams& kernel) {
    const int n = static_cast<int>(X.size());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double v = matern52(scaled_distance(X[i], X[j], kernel), kernel.signal_variance);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    for (double jitter = 1e-10; jitter <= 1e-4 * (1.0 + 1e-12); jitter *= 10.0) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += kernel.noise_variance + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success) continue;
        Factorization f;
        f.chol = llt.matrixL();
        f.alpha = llt.solve(y);
        f.jitter = jitter;
        double log_det_half = 0.0;
        for (int i = 0; i < n; ++i) log_det_half += std::log(f.chol(i, i));
        f.lml = -0.5 * y.dot(f.alpha) - log_det_half - 0.5 * n * std::log(2.0 * M_PI);
        return f;
    }
    return std::nullopt;
}

KernelParams kernel_from_log(const std::vector<double>& log_theta, std::size_t dims) {
    KernelParams k;
    k.lengthscales.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) k.lengthscales[d] = std::exp(log_theta[d]);
    k.signal_variance = std::exp(log_theta[dims]);
    k.noise_variance = std::exp(log_theta[dims + 1]);
    return k;
}

double lml_at(const std::vector<std::vector<double>>& X, const Eigen::VectorXd& y,
              const std::vector<double>& log_theta, std::size_t dims) {
    const auto f = factorize(X, y, kernel_from_log(log_theta, dims));
    return f ? f->lml : -std::numeric_limits<double>::infinity();
}

struct LogBounds {
    std::vector<double> lo, hi;
};

// Derivative-free coordinate pattern search, strictly improving in the LML.
std::pair<std::vector<double>, double> pattern_search(
    const std::vector<std::vector<double>>& X, const Eigen::VectorXd& y,
    std::vector<double> theta, const LogBounds& bounds, std::size_t dims) {
    double best = lml_at(X, y, theta, dims);
    double step = 1.0;
    while (step >= 1e-3) {
        bool improved = false;
        for (std::size_t c = 0; c < theta.size(); ++c) {
            for (double dir : {step, -step}) {
                const double saved = theta[c];
                theta[c] = std::clamp(saved + dir, bounds.lo[c], bounds.hi[c]);
                if (theta[c] == saved) continue;
                const double v = lml_at(X, y, theta, dims);
                if (v > best) {
                    best = v;
                    improved = true;
                    break;
                }
                theta[c] = saved;
            }
        }
        if (!improved) step *= 0.5;
    }
    return {theta, best};
}

void validate_data(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
    if (X.size() < 2) throw StateError("GP fit needs at least 2 observations");
    if (X.size() != y.size())
        throw ShapeError("GP fit: " + std::to_string(X.size()) + " inputs vs " +
                         std::to_string(y.size()) + " targets");
    for (const auto& row : X) {
        if (row.size() != X[0].size()) throw ShapeError("GP fit: ragged input rows");
        for (double v : row)
            if (!std::isfinite(v)) throw DataError("GP fit: non-finite input coordinate");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("GP fit: non-finite target");
}

} // namespace

double kernel_value(const std::vector<double>& a, const std::vector<double>& b,
                    const KernelParams& kernel) {
    validate_kernel(kernel);
    if (a.size() != kernel.lengthscales.size() || b.size() != kernel.lengthscales.size())
        throw ShapeError("kernel input dimension does not match lengthscale count");
    return matern52(scaled_distance(a, b, kernel), kernel.signal_variance);
}

std::vector<std::vector<double>> kernel_matrix(const std::vector<std::vector<double>>& X,
                                               const std::vector<std::vector<double>>& X2,
                                               const KernelParams& kernel) {
    validate_kernel(kernel);
    const std::size_t n = X.size(), m = X2.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(m, 0.0));
    const bool square = &X == &X2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j_hi = square ? i + 1 : m;
        for (std::size_t j = 0; j < j_hi; ++j)
            K[i][j] = matern52(scaled_distance(X[i], X2[j], kernel), kernel.signal_variance);
    }
    if (square)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < m; ++j) K[i][j] = K[j][i];
    return K;
}

GpModel GpModel::build(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       const KernelParams& kernel, bool standardize) {
    double mean = 0.0, scale = 1.0;
    if (standardize) {
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= static_cast<double>(y.size());
        scale = std::sqrt(var);
        if (scale < 1e-12) scale = 1.0; // constant targets
    }
    Eigen::VectorXd ys(static_cast<int>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) ys(static_cast<int>(i)) = (y[i] - mean) / scale;

    const auto f = factorize(X, ys, kernel);
    if (!f) throw NumericalError("GP Cholesky failed for all jitters up to 1e-4");

    GpModel m;
    m.x_ = X;
    m.kernel_ = kernel;
    m.y_mean_ = mean;
    m.y_scale_ = scale;
    m.jitter_ = f->jitter;
    m.lml_ = f->lml;
    const int n = static_cast<int>(X.size());
    m.y_scaled_.resize(n);
    m.alpha_.resize(n);
    m.chol_.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        m.y_scaled_[i] = ys(i);
        m.alpha_[i] = f->alpha(i);
        for (int j = 0; j <= i; ++j) m.chol_[static_cast<std::size_t>(i) * n + j] = f->chol(i, j);
    }
    return m;
}

GpModel GpModel::fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const GpOptions& opts) {
    validate_data(X, y);
    const std::size_t dims = X[0].size();

    // the likelihood search sees the scaled targets
    double mean = 0.0, scale = 1.0;
    if (opts.standardize) {
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= static_cast<double>(y.size());
        scale = std::sqrt(var);
        if (scale < 1e-12) scale = 1.0;
    }
    Eigen::VectorXd ys(static_cast<int>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) ys(static_cast<int>(i)) = (y[i] - mean) / scale;

    LogBounds bounds;
    bounds.lo.assign(dims, std::log(opts.lengthscale_lo));
    bounds.hi.assign(dims, std::log(opts.lengthscale_hi));
    bounds.lo.push_back(std::log(opts.signal_lo));
    bounds.hi.push_back(std::log(opts.signal_hi));
    bounds.lo.push_back(std::log(opts.noise_lo));
    bounds.hi.push_back(std::log(opts.noise_hi));

    std::vector<std::vector<double>> starts;
    std::vector<double> heuristic(dims + 2);
    for (std::size_t d = 0; d < dims; ++d) heuristic[d] = std::log(0.5);
    heuristic[dims] = 0.0;                // signal variance 1 after scaling
    heuristic[dims + 1] = std::log(1e-5); // mid-range noise
    for (std::size_t c = 0; c < heuristic.size(); ++c)
        heuristic[c] = std::clamp(heuristic[c], bounds.lo[c], bounds.hi[c]);
    starts.push_back(heuristic);

    Rng rng(derive_seed(opts.seed, "gp_restarts"));
    for (int r = 1; r < std::max(1, opts.restarts); ++r) {
        std::vector<double> s(dims + 2);
        for (std::size_t c = 0; c < s.size(); ++c) s[c] = rng.uniform(bounds.lo[c], bounds.hi[c]);
        starts.push_back(std::move(s));
    }

    std::vector<double> best_theta;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        auto [theta, value] = pattern_search(X, ys, s, bounds, dims);
        if (value > best) {
            best = value;
            best_theta = std::move(theta);
        }
    }
    if (best_theta.empty())
        throw NumericalError("GP fit: no kernel hyperparameters gave a valid Cholesky");

    return build(X, y, kernel_from_log(best_theta, dims), opts.standardize);
}

GpModel GpModel::fit_fixed(const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y, const KernelParams& kernel,
                           bool standardize) {
    validate_data(X, y);
    validate_kernel(kernel);
    if (kernel.lengthscales.size() != X[0].size())
        throw ShapeError("kernel lengthscale count does not match input dimension");
    return build(X, y, kernel, standardize);
}

GpPosterior GpModel::posterior(const std::vector<double>& x) const {
    if (!fitted()) throw StateError("posterior query on an unfitted GP");
    if (x.size() != kernel_.lengthscales.size())
        throw ShapeError("posterior query dimension mismatch");
    const int n = size();
    std::vector<double> k_star(n);
    for (int i = 0; i < n; ++i)
        k_star[i] = matern52(scaled_distance(x, x_[i], kernel_), kernel_.signal_variance);

    double mean_scaled = 0.0;
    for (int i = 0; i < n; ++i) mean_scaled += k_star[i] * alpha_[i];

    // v = L^-1 k*, forward substitution on the stored lower factor
    std::vector<double> v = k_star;
    for (int i = 0; i < n; ++i) {
        double s = v[i];
        const double* row = chol_.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < i; ++j) s -= row[j] * v[j];
        v[i] = s / row[i];
    }
    double vtv = 0.0;
    for (int i = 0; i < n; ++i) vtv += v[i] * v[i];

    GpPosterior post;
    post.mean = y_mean_ + y_scale_ * mean_scaled;
    post.raw_variance = y_scale_ * y_scale_ * (kernel_.signal_variance - vtv);
    post.variance = std::max(0.0, post.raw_variance);
    if (!std::isfinite(post.mean) || !std::isfinite(post.variance))
        throw NumericalError("non-finite GP posterior");
    return post;
}

double GpModel::log_marginal_likelihood() const {
    if (!fitted()) throw StateError("LML query on an unfitted GP");
    return lml_;
}

double GpModel::min_target() const {
    if (!fitted()) throw StateError("min_target query on an unfitted GP");
    double best = y_scaled_[0];
    for (double v : y_scaled_) best = std::min(best, v);
    return y_mean_ + y_scale_ * best;
}

} // namespace ecgopt
