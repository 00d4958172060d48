#pragma once

#include <cstddef>

// Compute kernels behind the layer implementations. Every kernel exists in
// two variants with identical signatures: kernels::serial is the reference,
// kernels::omp parallelises with OpenMP. Both produce bitwise-identical
// results: each output element is owned by exactly one thread and its inner
// summation order never changes, so results do not depend on thread count.
// The unqualified kernels::* wrappers dispatch on a process-wide flag.
//
// Layouts:
//   feature maps   value(b, i, c)  -> ((b * len) + i) * ch + c
//   conv weights   w(j, ci, co)    -> ((j * in_ch) + ci) * out_ch + co
//   dense weights  w(i, o)         -> i * out_w + o

namespace ecgopt::kernels {

bool parallel_enabled();
void set_parallel(bool on);

namespace serial {

// Same-padding, stride-1 cross correlation along the length axis.
void conv1d_forward(const double* in, int batch, int len, int in_ch,
                    const double* w, const double* bias, int k, int out_ch,
                    double* out);
void conv1d_backward_input(const double* up, int batch, int len, int out_ch,
                           const double* w, int k, int in_ch, double* in_grad);
void conv1d_backward_weights(const double* in, const double* up, int batch, int len,
                             int in_ch, int out_ch, int k, double* w_grad);
void conv1d_backward_bias(const double* up, int batch, int len, int out_ch,
                          double* b_grad);

void dense_forward(const double* in, int batch, int in_w, const double* w,
                   const double* bias, int out_w, double* out);
void dense_backward_input(const double* up, int batch, int out_w, const double* w,
                          int in_w, double* in_grad);
void dense_backward_weights(const double* in, const double* up, int batch,
                            int in_w, int out_w, double* w_grad);
void dense_backward_bias(const double* up, int batch, int out_w, double* b_grad);

void relu_forward(const double* in, std::size_t n, double* out);
// Gradient convention: zero where in <= 0, including exactly at 0.
void relu_backward(const double* in, const double* up, std::size_t n, double* in_grad);

// Non-overlapping windows, stride == pool, remainder dropped; ties keep the
// first index. argmax records input positions for backward routing.
void maxpool1d_forward(const double* in, int batch, int len, int ch, int pool,
                       double* out, int* argmax);
void maxpool1d_backward(const double* up, int batch, int out_len, int ch,
                        const int* argmax, int in_len, double* in_grad);

// out = in * mask * scale; serves dropout forward and backward.
void scale_mask(const double* in, const unsigned char* mask, double scale,
                std::size_t n, double* out);
void add(const double* a, const double* b, std::size_t n, double* out);

// One Adam update with precomputed bias corrections bc1 = 1 - beta1^t,
// bc2 = 1 - beta2^t and the decayed step size lr_t.
void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 double lr_t, double beta1, double beta2, double eps,
                 double bc1, double bc2);

} // namespace serial

namespace omp {

void conv1d_forward(const double* in, int batch, int len, int in_ch,
                    const double* w, const double* bias, int k, int out_ch,
                    double* out);
void conv1d_backward_input(const double* up, int batch, int len, int out_ch,
                           const double* w, int k, int in_ch, double* in_grad);
void conv1d_backward_weights(const double* in, const double* up, int batch, int len,
                             int in_ch, int out_ch, int k, double* w_grad);
void conv1d_backward_bias(const double* up, int batch, int len, int out_ch,
                          double* b_grad);
void dense_forward(const double* in, int batch, int in_w, const double* w,
                   const double* bias, int out_w, double* out);
void dense_backward_input(const double* up, int batch, int out_w, const double* w,
                          int in_w, double* in_grad);
void dense_backward_weights(const double* in, const double* up, int batch,
                            int in_w, int out_w, double* w_grad);
void dense_backward_bias(const double* up, int batch, int out_w, double* b_grad);
void relu_forward(const double* in, std::size_t n, double* out);
void relu_backward(const double* in, const double* up, std::size_t n, double* in_grad);
void maxpool1d_forward(const double* in, int batch, int len, int ch, int pool,
                       double* out, int* argmax);
void maxpool1d_backward(const double* up, int batch, int out_len, int ch,
                        const int* argmax, int in_len, double* in_grad);
void scale_mask(const double* in, const unsigned char* mask, double scale,
                std::size_t n, double* out);
void add(const double* a, const double* b, std::size_t n, double* out);
void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                 double lr_t, double beta1, double beta2, double eps,
                 double bc1, double bc2);

} // namespace omp

inline void conv1d_forward(const double* in, int batch, int len, int in_ch,
                           const double* w, const double* bias, int k, int out_ch,
                           double* out) {
    parallel_enabled() ? omp::conv1d_forward(in, batch, len, in_ch, w, bias, k, out_ch, out)
                       : serial::conv1d_forward(in, batch, len, in_ch, w, bias, k, out_ch, out);
}
inline void conv1d_backward_input(const double* up, int batch, int len, int out_ch,
                                  const double* w, int k, int in_ch, double* in_grad) {
    parallel_enabled() ? omp::conv1d_backward_input(up, batch, len, out_ch, w, k, in_ch, in_grad)
                       : serial::conv1d_backward_input(up, batch, len, out_ch, w, k, in_ch, in_grad);
}
inline void conv1d_backward_weights(const double* in, const double* up, int batch, int len,
                                    int in_ch, int out_ch, int k, double* w_grad) {
    parallel_enabled() ? omp::conv1d_backward_weights(in, up, batch, len, in_ch, out_ch, k, w_grad)
                       : serial::conv1d_backward_weights(in, up, batch, len, in_ch, out_ch, k, w_grad);
}
inline void conv1d_backward_bias(const double* up, int batch, int len, int out_ch,
                                 double* b_grad) {
    parallel_enabled() ? omp::conv1d_backward_bias(up, batch, len, out_ch, b_grad)
                       : serial::conv1d_backward_bias(up, batch, len, out_ch, b_grad);
}
inline void dense_forward(const double* in, int batch, int in_w, const double* w,
                          const double* bias, int out_w, double* out) {
    parallel_enabled() ? omp::dense_forward(in, batch, in_w, w, bias, out_w, out)
                       : serial::dense_forward(in, batch, in_w, w, bias, out_w, out);
}
inline void dense_backward_input(const double* up, int batch, int out_w, const double* w,
                                 int in_w, double* in_grad) {
    parallel_enabled() ? omp::dense_backward_input(up, batch, out_w, w, in_w, in_grad)
                       : serial::dense_backward_input(up, batch, out_w, w, in_w, in_grad);
}
inline void dense_backward_weights(const double* in, const double* up, int batch,
                                   int in_w, int out_w, double* w_grad) {
    parallel_enabled() ? omp::dense_backward_weights(in, up, batch, in_w, out_w, w_grad)
                       : serial::dense_backward_weights(in, up, batch, in_w, out_w, w_grad);
}
inline void dense_backward_bias(const double* up, int batch, int out_w, double* b_grad) {
    parallel_enabled() ? omp::dense_backward_bias(up, batch, out_w, b_grad)
                       : serial::dense_backward_bias(up, batch, out_w, b_grad);
}
inline void relu_forward(const double* in, std::size_t n, double* out) {
    parallel_enabled() ? omp::relu_forward(in, n, out) : serial::relu_forward(in, n, out);
}
inline void relu_backward(const double* in, const double* up, std::size_t n, double* in_grad) {
    parallel_enabled() ? omp::relu_backward(in, up, n, in_grad)
                       : serial::relu_backward(in, up, n, in_grad);
}
inline void maxpool1d_forward(const double* in, int batch, int len, int ch, int pool,
                              double* out, int* argmax) {
    parallel_enabled() ? omp::maxpool1d_forward(in, batch, len, ch, pool, out, argmax)
                       : serial::maxpool1d_forward(in, batch, len, ch, pool, out, argmax);
}
inline void maxpool1d_backward(const double* up, int batch, int out_len, int ch,
                               const int* argmax, int in_len, double* in_grad) {
    parallel_enabled() ? omp::maxpool1d_backward(up, batch, out_len, ch, argmax, in_len, in_grad)
                       : serial::maxpool1d_backward(up, batch, out_len, ch, argmax, in_len, in_grad);
}
inline void scale_mask(const double* in, const unsigned char* mask, double scale,
                       std::size_t n, double* out) {
    parallel_enabled() ? omp::scale_mask(in, mask, scale, n, out)
                       : serial::scale_mask(in, mask, scale, n, out);
}
inline void add(const double* a, const double* b, std::size_t n, double* out) {
    parallel_enabled() ? omp::add(a, b, n, out) : serial::add(a, b, n, out);
}
inline void adam_update(double* w, const double* g, double* m, double* v, std::size_t n,
                        double lr_t, double beta1, double beta2, double eps,
                        double bc1, double bc2) {
    parallel_enabled() ? omp::adam_update(w, g, m, v, n, lr_t, beta1, beta2, eps, bc1, bc2)
                       : serial::adam_update(w, g, m, v, n, lr_t, beta1, beta2, eps, bc1, bc2);
}

} // namespace ecgopt::kernels
