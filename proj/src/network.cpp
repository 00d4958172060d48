#include "ecgopt/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ecgopt/kernels.hpp"

namespace ecgopt {

SoftmaxCrossEntropy softmax_crossentropy(const Tensor& logits, const std::vector<int>& labels) {
    const int batch = logits.batch;
    const int k = logits.channels;
    if (logits.length != 1)
        throw ShapeError("logits must have length 1, got " + std::to_string(logits.length));
    if (static_cast<int>(labels.size()) != batch)
        throw ShapeError("label count " + std::to_string(labels.size()) +
                         " does not match batch " + std::to_string(batch));

    SoftmaxCrossEntropy out{0.0, Tensor(batch, 1, k)};
    const double inv_batch = 1.0 / batch;
    std::vector<double> p(k);
    for (int b = 0; b < batch; ++b) {
        const int label = labels[b];
        if (label < 0 || label >= k)
            throw DataError("label " + std::to_string(label) + " out of range for " +
                            std::to_string(k) + " classes");
        const double* z = logits.values.data() + static_cast<std::size_t>(b) * k;
        double zmax = z[0];
        for (int c = 1; c < k; ++c) zmax = std::max(zmax, z[c]);
        double sum = 0.0;
        for (int c = 0; c < k; ++c) {
            p[c] = std::exp(z[c] - zmax);
            sum += p[c];
        }
        out.loss += -(z[label] - zmax - std::log(sum));
        double* g = out.logit_grad.values.data() + static_cast<std::size_t>(b) * k;
        for (int c = 0; c < k; ++c) g[c] = (p[c] / sum - (c == label ? 1.0 : 0.0)) * inv_batch;
    }
    out.loss *= inv_batch;
    return out;
}

void softmax_inplace(Tensor& logits) {
    const int k = logits.channels;
    for (int b = 0; b < logits.batch; ++b) {
        double* z = logits.values.data() + static_cast<std::size_t>(b) * logits.length * k;
        for (int i = 0; i < logits.length; ++i, z += k) {
            double zmax = z[0];
            for (int c = 1; c < k; ++c) zmax = std::max(zmax, z[c]);
            double sum = 0.0;
            for (int c = 0; c < k; ++c) {
                z[c] = std::exp(z[c] - zmax);
                sum += z[c];
            }
            for (int c = 0; c < k; ++c) z[c] /= sum;
        }
    }
}

namespace {

void init_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / fan_in);
    for (double& x : w) x = rng.uniform(-limit, limit);
}

} // namespace

Network::Network(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    shapes_ = infer_shapes(spec_); // throws on inconsistent descriptors
    rt_.resize(spec_.layers.size());
    logit_layers_ = static_cast<int>(spec_.layers.size());
    if (!spec_.layers.empty() && spec_.layers.back().kind == LayerKind::Softmax)
        --logit_layers_;

    Rng rng(init_seed);
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const LayerDesc& d = spec_.layers[i];
        Runtime& r = rt_[i];
        switch (d.kind) {
            case LayerKind::Conv1D:
                r.weight.resize(static_cast<std::size_t>(d.kernel_size) * d.in_channels *
                                d.out_channels);
                r.bias.resize(d.out_channels);
                init_uniform(r.weight.value, d.kernel_size * d.in_channels, rng);
                break;
            case LayerKind::Dense:
                r.weight.resize(static_cast<std::size_t>(d.in_width) * d.out_width);
                r.bias.resize(d.out_width);
                init_uniform(r.weight.value, d.in_width, rng);
                break;
            case LayerKind::ResidualAdd:
                if (d.projection) {
                    r.weight.resize(static_cast<std::size_t>(d.in_channels) * d.out_channels);
                    r.bias.resize(d.out_channels);
                    init_uniform(r.weight.value, d.in_channels, rng);
                }
                break;
            default:
                break;
        }
    }
    acts_.resize(spec_.layers.size() + 1);
    act_grads_.resize(spec_.layers.size() + 1);
}

Tensor Network::forward(const Tensor& input, bool training, Rng* dropout_rng) {
    if (input.channels != spec_.input_channels || input.length != spec_.input_length)
        throw ShapeError("network expects " + std::to_string(spec_.input_length) + "x" +
                         std::to_string(spec_.input_channels) + " input, got " +
                         std::to_string(input.length) + "x" + std::to_string(input.channels));

    forward_was_training_ = training;
    const int batch = input.batch;
    acts_[0] = input;
    for (int i = 0; i < logit_layers_; ++i) {
        const LayerDesc& d = spec_.layers[i];
        Runtime& r = rt_[i];
        const Tensor& in = acts_[i];
        Tensor& out = acts_[i + 1];
        switch (d.kind) {
            case LayerKind::Conv1D:
                out = Tensor(batch, in.length, d.out_channels);
                kernels::conv1d_forward(in.values.data(), batch, in.length, d.in_channels,
                                        r.weight.value.data(), r.bias.value.data(),
                                        d.kernel_size, d.out_channels, out.values.data());
                break;
            case LayerKind::ReLU:
                out = Tensor(batch, in.length, in.channels);
                kernels::relu_forward(in.values.data(), in.size(), out.values.data());
                break;
            case LayerKind::MaxPool1D: {
                const int out_len = in.length / d.pool_size;
                out = Tensor(batch, out_len, in.channels);
                r.argmax.resize(out.size());
                kernels::maxpool1d_forward(in.values.data(), batch, in.length, in.channels,
                                           d.pool_size, out.values.data(), r.argmax.data());
                break;
            }
            case LayerKind::Dropout: {
                out = Tensor(batch, in.length, in.channels);
                if (!training || d.drop_rate == 0.0) {
                    out.values = in.values;
                    r.mask.clear();
                    break;
                }
                if (dropout_rng == nullptr)
                    throw StateError("training forward through dropout requires an rng");
                if (!freeze_masks_ || r.mask.size() != in.size()) {
                    r.mask.resize(in.size());
                    for (std::size_t j = 0; j < in.size(); ++j)
                        r.mask[j] = dropout_rng->uniform() >= d.drop_rate ? 1 : 0;
                }
                kernels::scale_mask(in.values.data(), r.mask.data(), 1.0 / (1.0 - d.drop_rate),
                                    in.size(), out.values.data());
                break;
            }
            case LayerKind::Dense:
                if (in.length * in.channels != d.in_width)
                    throw ShapeError("dense layer " + std::to_string(i) + " expects width " +
                                     std::to_string(d.in_width) + ", got " +
                                     std::to_string(in.length * in.channels));
                out = Tensor(batch, 1, d.out_width);
                kernels::dense_forward(in.values.data(), batch, d.in_width,
                                       r.weight.value.data(), r.bias.value.data(), d.out_width,
                                       out.values.data());
                break;
            case LayerKind::ResidualAdd: {
                const Tensor& shortcut = acts_[d.source_layer];
                if (d.projection) {
                    Tensor proj(batch, shortcut.length, d.out_channels);
                    kernels::conv1d_forward(shortcut.values.data(), batch, shortcut.length,
                                            d.in_channels, r.weight.value.data(),
                                            r.bias.value.data(), 1, d.out_channels,
                                            proj.values.data());
                    if (!proj.same_shape(in))
                        throw ShapeError("residual shortcut does not match block output");
                    out = Tensor(batch, in.length, in.channels);
                    kernels::add(in.values.data(), proj.values.data(), in.size(),
                                 out.values.data());
                } else {
                    if (!shortcut.same_shape(in))
                        throw ShapeError("residual shortcut does not match block output");
                    out = Tensor(batch, in.length, in.channels);
                    kernels::add(in.values.data(), shortcut.values.data(), in.size(),
                                 out.values.data());
                }
                break;
            }
            case LayerKind::Softmax:
                out = in;
                softmax_inplace(out);
                break;
        }
    }
    return acts_[logit_layers_];
}

void Network::backward(const Tensor& logit_grad) {
    if (!forward_was_training_)
        throw StateError("backward requires a preceding training-mode forward");
    const int batch = logit_grad.batch;
    act_grads_[logit_layers_] = logit_grad;

    int pending_target = -1;
    Tensor pending;
    for (int i = logit_layers_ - 1; i >= 0; --i) {
        const LayerDesc& d = spec_.layers[i];
        Runtime& r = rt_[i];
        const Tensor& up = act_grads_[i + 1];
        const Tensor& in = acts_[i];
        Tensor& down = act_grads_[i];
        switch (d.kind) {
            case LayerKind::Conv1D:
                kernels::conv1d_backward_weights(in.values.data(), up.values.data(), batch,
                                                 in.length, d.in_channels, d.out_channels,
                                                 d.kernel_size, r.weight.grad.data());
                kernels::conv1d_backward_bias(up.values.data(), batch, in.length, d.out_channels,
                                              r.bias.grad.data());
                down = Tensor(batch, in.length, d.in_channels);
                kernels::conv1d_backward_input(up.values.data(), batch, in.length, d.out_channels,
                                               r.weight.value.data(), d.kernel_size, d.in_channels,
                                               down.values.data());
                break;
            case LayerKind::ReLU:
                down = Tensor(batch, in.length, in.channels);
                kernels::relu_backward(in.values.data(), up.values.data(), in.size(),
                                       down.values.data());
                break;
            case LayerKind::MaxPool1D:
                down = Tensor(batch, in.length, in.channels);
                kernels::maxpool1d_backward(up.values.data(), batch, up.length, in.channels,
                                            r.argmax.data(), in.length, down.values.data());
                break;
            case LayerKind::Dropout:
                down = Tensor(batch, in.length, in.channels);
                if (r.mask.empty())
                    down.values = up.values;
                else
                    kernels::scale_mask(up.values.data(), r.mask.data(),
                                        1.0 / (1.0 - d.drop_rate), in.size(), down.values.data());
                break;
            case LayerKind::Dense:
                kernels::dense_backward_weights(in.values.data(), up.values.data(), batch,
                                                d.in_width, d.out_width, r.weight.grad.data());
                kernels::dense_backward_bias(up.values.data(), batch, d.out_width,
                                             r.bias.grad.data());
                down = Tensor(batch, in.length, in.channels);
                kernels::dense_backward_input(up.values.data(), batch, d.out_width,
                                              r.weight.value.data(), d.in_width,
                                              down.values.data());
                break;
            case LayerKind::ResidualAdd: {
                // Upstream passes unchanged to the block; the shortcut branch
                // is applied once the sweep reaches the source activation.
                down = up;
                const Tensor& shortcut = acts_[d.source_layer];
                if (d.projection) {
                    kernels::conv1d_backward_weights(shortcut.values.data(), up.values.data(),
                                                     batch, shortcut.length, d.in_channels,
                                                     d.out_channels, 1, r.weight.grad.data());
                    kernels::conv1d_backward_bias(up.values.data(), batch, shortcut.length,
                                                  d.out_channels, r.bias.grad.data());
                    pending = Tensor(batch, shortcut.length, d.in_channels);
                    kernels::conv1d_backward_input(up.values.data(), batch, shortcut.length,
                                                   d.out_channels, r.weight.value.data(), 1,
                                                   d.in_channels, pending.values.data());
                } else {
                    pending = up;
                }
                pending_target = d.source_layer;
                break;
            }
            case LayerKind::Softmax:
                down = up; // never reached during training; loss is fused on logits
                break;
        }
        if (i == pending_target) {
            for (std::size_t j = 0; j < down.size(); ++j) down.values[j] += pending.values[j];
            pending_target = -1;
        }
    }
}

Tensor Network::probabilities(const Tensor& input) {
    Tensor logits = forward(input, false);
    softmax_inplace(logits);
    return logits;
}

std::vector<int> Network::predict(const Tensor& input) {
    const Tensor logits = forward(input, false);
    std::vector<int> labels(logits.batch);
    const int k = logits.channels;
    for (int b = 0; b < logits.batch; ++b) {
        const double* z = logits.values.data() + static_cast<std::size_t>(b) * k;
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (z[c] > z[best]) best = c;
        labels[b] = best;
    }
    return labels;
}

std::vector<Param*> Network::params() {
    std::vector<Param*> out;
    for (auto& r : rt_) {
        if (!r.weight.value.empty()) out.push_back(&r.weight);
        if (!r.bias.value.empty()) out.push_back(&r.bias);
    }
    return out;
}

std::vector<const Param*> Network::params() const {
    std::vector<const Param*> out;
    for (const auto& r : rt_) {
        if (!r.weight.value.empty()) out.push_back(&r.weight);
        if (!r.bias.value.empty()) out.push_back(&r.bias);
    }
    return out;
}

std::vector<std::vector<double>> Network::weight_snapshot() const {
    std::vector<std::vector<double>> snap;
    for (const Param* p : params()) snap.push_back(p->value);
    return snap;
}

void Network::restore_weights(const std::vector<std::vector<double>>& snapshot) {
    auto ps = params();
    if (snapshot.size() != ps.size())
        throw StateError("weight snapshot has " + std::to_string(snapshot.size()) +
                         " arrays, network has " + std::to_string(ps.size()));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (snapshot[i].size() != ps[i]->value.size())
            throw StateError("weight snapshot array " + std::to_string(i) + " size mismatch");
        ps[i]->value = snapshot[i];
    }
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos++])) << (8 * i);
    return v;
}
std::uint64_t get_u64(const std::string& s, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos++])) << (8 * i);
    return v;
}

constexpr char kMagic[4] = {'E', 'C', 'G', 'M'};
constexpr std::uint32_t kVersion = 1;

} // namespace

void save_model(const Network& net, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    const std::string spec_json = to_json(net.spec()).dump();
    put_u32(buf, static_cast<std::uint32_t>(spec_json.size()));
    buf += spec_json;
    const auto ps = net.params();
    put_u32(buf, static_cast<std::uint32_t>(ps.size()));
    for (const Param* p : ps) {
        put_u64(buf, p->value.size());
        for (double x : p->value) put_u64(buf, std::bit_cast<std::uint64_t>(x));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw DataError("failed writing model file '" + path + "'");
}

Network load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open model file '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    if (buf.size() < 12 || buf.compare(0, 4, kMagic, 4) != 0)
        throw DataError("'" + path + "' is not a model file");
    pos = 4;
    const std::uint32_t version = get_u32(buf, pos);
    if (version != kVersion)
        throw DataError("model file version " + std::to_string(version) + " unsupported");
    const std::uint32_t json_len = get_u32(buf, pos);
    if (pos + json_len > buf.size()) throw DataError("truncated model file '" + path + "'");
    const ModelSpec spec = model_spec_from_json(nlohmann::json::parse(buf.substr(pos, json_len)));
    pos += json_len;

    Network net(spec, 0);
    auto ps = net.params();
    if (pos + 4 > buf.size()) throw DataError("truncated model file '" + path + "'");
    const std::uint32_t array_count = get_u32(buf, pos);
    if (array_count != ps.size())
        throw DataError("model file has " + std::to_string(array_count) +
                        " parameter arrays, architecture needs " + std::to_string(ps.size()));
    for (Param* p : ps) {
        if (pos + 8 > buf.size()) throw DataError("truncated model file '" + path + "'");
        const std::uint64_t n = get_u64(buf, pos);
        if (n != p->value.size() || pos + 8 * n > buf.size())
            throw DataError("parameter array size mismatch in '" + path + "'");
        for (std::uint64_t i = 0; i < n; ++i)
            p->value[i] = std::bit_cast<double>(get_u64(buf, pos));
    }
    return net;
}

} // namespace ecgopt
