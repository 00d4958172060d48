#include "ecgopt/kernels.hpp"

#include <cmath>
#include <cstdint>

// OpenMP variants. Parallel loops run over independent output elements only;
// every inner summation keeps the serial order, so each function is
// bitwise-equal to its kernels::serial counterpart for any thread count.

namespace ecgopt::kernels::omp {

void conv1d_forward(const double* in, int batch, int len, int in_ch,
                    const double* w, const double* bias, int k, int out_ch,
                    double* out) {
    const int off = k / 2;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const double* in_b = in + static_cast<std::size_t>(b) * len * in_ch;
        double* out_b = out + static_cast<std::size_t>(b) * len * out_ch;
        for (int i = 0; i < len; ++i) {
            double* out_bi = out_b + static_cast<std::size_t>(i) * out_ch;
            for (int co = 0; co < out_ch; ++co) out_bi[co] = bias[co];
            for (int j = 0; j < k; ++j) {
                const int t = i + j - off;
                if (t < 0 || t >= len) continue;
                const double* in_bt = in_b + static_cast<std::size_t>(t) * in_ch;
                const double* w_j = w + static_cast<std::size_t>(j) * in_ch * out_ch;
                for (int ci = 0; ci < in_ch; ++ci) {
                    const double x = in_bt[ci];
                    const double* w_jci = w_j + static_cast<std::size_t>(ci) * out_ch;
                    for (int co = 0; co < out_ch; ++co) out_bi[co] += x * w_jci[co];
                }
            }
        }
    }
}

void conv1d_backward_input(const double* up, int batch, int len, int out_ch,
                           const double* w, int k, int in_ch, double* in_grad) {
    const int off = k / 2;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const double* up_b = up + static_cast<std::size_t>(b) * len * out_ch;
        double* g_b = in_grad + static_cast<std::size_t>(b) * len * in_ch;
        for (int t = 0; t < len; ++t) {
            double* g_bt = g_b + static_cast<std::size_t>(t) * in_ch;
            for (int ci = 0; ci < in_ch; ++ci) g_bt[ci] = 0.0;
            for (int j = 0; j < k; ++j) {
                const int i = t - j + off;
                if (i < 0 || i >= len) continue;
                const double* up_bi = up_b + static_cast<std::size_t>(i) * out_ch;
                const double* w_j = w + static_cast<std::size_t>(j) * in_ch * out_ch;
                for (int ci = 0; ci < in_ch; ++ci) {
                    const double* w_jci = w_j + static_cast<std::size_t>(ci) * out_ch;
                    double acc = 0.0;
                    for (int co = 0; co < out_ch; ++co) acc += up_bi[co] * w_jci[co];
                    g_bt[ci] += acc;
                }
            }
        }
    }
}

void conv1d_backward_weights(const double* in, const double* up, int batch, int len,
                             int in_ch, int out_ch, int k, double* w_grad) {
    const int off = k / 2;
    const int taps = k * in_ch; // one (j, ci) weight column per task
#pragma omp parallel for schedule(static)
    for (int jc = 0; jc < taps; ++jc) {
        const int j = jc / in_ch;
        const int ci = jc % in_ch;
        double* wg = w_grad + static_cast<std::size_t>(jc) * out_ch;
        for (int co = 0; co < out_ch; ++co) wg[co] = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double* in_b = in + static_cast<std::size_t>(b) * len * in_ch;
            const double* up_b = up + static_cast<std::size_t>(b) * len * out_ch;
            for (int i = 0; i < len; ++i) {
                const int t = i + j - off;
                if (t < 0 || t >= len) continue;
                const double x = in_b[static_cast<std::size_t>(t) * in_ch + ci];
                const double* up_bi = up_b + static_cast<std::size_t>(i) * out_ch;
                for (int co = 0; co < out_ch; ++co) wg[co] += x * up_bi[co];
            }
        }
    }
}

void conv1d_backward_bias(const double* up, int batch, int len, int out_ch,
                          double* b_grad) {
#pragma omp parallel for schedule(static)
    for (int co = 0; co < out_ch; ++co) {
        double acc = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double* up_b = up + static_cast<std::size_t>(b) * len * out_ch;
            for (int i = 0; i < len; ++i) acc += up_b[static_cast<std::size_t>(i) * out_ch + co];
        }
        b_grad[co] = acc;
    }
}

void dense_forward(const double* in, int batch, int in_w, const double* w,
                   const double* bias, int out_w, double* out) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const double* in_b = in + static_cast<std::size_t>(b) * in_w;
        double* out_b = out + static_cast<std::size_t>(b) * out_w;
        for (int o = 0; o < out_w; ++o) out_b[o] = bias[o];
        for (int i = 0; i < in_w; ++i) {
            const double x = in_b[i];
            const double* w_i = w + static_cast<std::size_t>(i) * out_w;
            for (int o = 0; o < out_w; ++o) out_b[o] += x * w_i[o];
        }
    }
}

void dense_backward_input(const double* up, int batch, int out_w, const double* w,
                          int in_w, double* in_grad) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const double* up_b = up + static_cast<std::size_t>(b) * out_w;
        double* g_b = in_grad + static_cast<std::size_t>(b) * in_w;
        for (int i = 0; i < in_w; ++i) {
            const double* w_i = w + static_cast<std::size_t>(i) * out_w;
            double acc = 0.0;
            for (int o = 0; o < out_w; ++o) acc += up_b[o] * w_i[o];
            g_b[i] = acc;
        }
    }
}

void dense_backward_weights(const double* in, const double* up, int batch,
                            int in_w, int out_w, double* w_grad) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < in_w; ++i) {
        double* wg = w_grad + static_cast<std::size_t>(i) * out_w;
        for (int o = 0; o < out_w; ++o) wg[o] = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double x = in[static_cast<std::size_t>(b) * in_w + i];
            const double* up_b = up + static_cast<std::size_t>(b) * out_w;
            for (int o = 0; o < out_w; ++o) wg[o] += x * up_b[o];
        }
    }
}

void dense_backward_bias(const double* up, int batch, int out_w, double* b_grad) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_w; ++o) {
        double acc = 0.0;
        for (int b = 0; b < batch; ++b) acc += up[static_cast<std::size_t>(b) * out_w + o];
        b_grad[o] = acc;
    }
}

void relu_forward(const double* in, std::size_t n, double* out) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

void relu_backward(const double* in, const double* up, std::size_t n, double* in_grad) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) in_grad[i] = in[i] > 0.0 ? up[i] : 0.0;
}

void maxpool1d_forward(const double* in, int batch, int len, int ch, int pool,
                       double* out, int* argmax) {
    const int out_len = len / pool;
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const double* in_b = in + static_cast<std::size_t>(b) * len * ch;
        const std::size_t out_base = static_cast<std::size_t>(b) * out_len * ch;
        for (int ow = 0; ow < out_len; ++ow) {
            for (int c = 0; c < ch; ++c) {
                int best = ow * pool;
                double best_v = in_b[static_cast<std::size_t>(best) * ch + c];
                for (int p = 1; p < pool; ++p) {
                    const int t = ow * pool + p;
                    const double v = in_b[static_cast<std::size_t>(t) * ch + c];
                    if (v > best_v) {
                        best_v = v;
                        best = t;
                    }
                }
                const std::size_t oidx = out_base + static_cast<std::size_t>(ow) * ch + c;
                out[oidx] = best_v;
                argmax[oidx] = best;
            }
        }
    }
}

void maxpool1d_backward(const double* up, int batch, int out_len, int ch,
                        const int* argmax, int in_len, double* in_grad) {
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        const std::size_t out_base = static_cast<std::size_t>(b) * out_len * ch;
        double* g_b = in_grad + static_cast<std::size_t>(b) * in_len * ch;
        for (std::size_t i = 0; i < static_cast<std::size_t>(in_len) * ch; ++i) g_b[i] = 0.0;
        for (int ow = 0; ow < out_len; ++ow) {
            for (int c = 0; c < ch; ++c) {
                const std::size_t oidx = out_base + static_cast<std::size_t>(ow) * ch + c;
                g_b[static_cast<std::size_t>(argmax[oidx]) * ch + c] = up[oidx];
            }
        }
    }
}

void scale_mask(const double* in, const unsigned char* mask, double scale,
                std::size_t n, double* out) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) out[i] = mask[i] ? in[i] * scale : 0.0;
}

void add(const double* a, const double* b, std::size_t n, double* out) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) out[i] = a[i] + b[i];
}

void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 double lr_t, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
    const std::int64_t sn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < sn; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        w[i] -= lr_t * m_hat / (std::sqrt(v_hat) + eps);
    }
}

} // namespace ecgopt::kernels::omp
