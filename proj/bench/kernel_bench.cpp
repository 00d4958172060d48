// Times the serial reference kernels against their OpenMP counterparts on
// training-sized shapes and prints the speedup table.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "ecgopt/kernels.hpp"
#include "ecgopt/rng.hpp"

using namespace ecgopt;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_ms, double omp_ms) {
    std::printf("%-28s %10.3f %10.3f %8.2fx\n", name, serial_ms, omp_ms, serial_ms / omp_ms);
}

} // namespace

int main() {
    const int batch = 64, len = 250, in_ch = 32, out_ch = 64, k = 5;
    const int reps = 20;
    Rng rng(7);

    const auto in = random_vec(static_cast<std::size_t>(batch) * len * in_ch, rng);
    const auto w = random_vec(static_cast<std::size_t>(k) * in_ch * out_ch, rng);
    const auto bias = random_vec(out_ch, rng);
    const auto up = random_vec(static_cast<std::size_t>(batch) * len * out_ch, rng);
    std::vector<double> out(up.size()), in_grad(in.size()), w_grad(w.size()), b_grad(bias.size());

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

    row("conv1d_forward",
        time_ms([&] { kernels::serial::conv1d_forward(in.data(), batch, len, in_ch, w.data(),
                                                      bias.data(), k, out_ch, out.data()); }, reps),
        time_ms([&] { kernels::omp::conv1d_forward(in.data(), batch, len, in_ch, w.data(),
                                                   bias.data(), k, out_ch, out.data()); }, reps));
    row("conv1d_backward_input",
        time_ms([&] { kernels::serial::conv1d_backward_input(up.data(), batch, len, out_ch,
                                                             w.data(), k, in_ch, in_grad.data()); },
                reps),
        time_ms([&] { kernels::omp::conv1d_backward_input(up.data(), batch, len, out_ch, w.data(),
                                                          k, in_ch, in_grad.data()); }, reps));
    row("conv1d_backward_weights",
        time_ms([&] { kernels::serial::conv1d_backward_weights(in.data(), up.data(), batch, len,
                                                               in_ch, out_ch, k, w_grad.data()); },
                reps),
        time_ms([&] { kernels::omp::conv1d_backward_weights(in.data(), up.data(), batch, len,
                                                            in_ch, out_ch, k, w_grad.data()); },
                reps));

    const int in_w = 2048, out_w = 64;
    const auto din = random_vec(static_cast<std::size_t>(batch) * in_w, rng);
    const auto dw = random_vec(static_cast<std::size_t>(in_w) * out_w, rng);
    const auto dbias = random_vec(out_w, rng);
    const auto dup = random_vec(static_cast<std::size_t>(batch) * out_w, rng);
    std::vector<double> dout(dup.size()), dw_grad(dw.size()), din_grad(din.size());

    row("dense_forward",
        time_ms([&] { kernels::serial::dense_forward(din.data(), batch, in_w, dw.data(),
                                                     dbias.data(), out_w, dout.data()); }, reps),
        time_ms([&] { kernels::omp::dense_forward(din.data(), batch, in_w, dw.data(),
                                                  dbias.data(), out_w, dout.data()); }, reps));
    row("dense_backward_weights",
        time_ms([&] { kernels::serial::dense_backward_weights(din.data(), dup.data(), batch, in_w,
                                                              out_w, dw_grad.data()); }, reps),
        time_ms([&] { kernels::omp::dense_backward_weights(din.data(), dup.data(), batch, in_w,
                                                           out_w, dw_grad.data()); }, reps));
    return 0;
}
