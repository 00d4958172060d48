#include "ecgopt/synth_ecg.hpp"

#include <algorithm>
#include <cmath>

#include "ecgopt/rng.hpp"

namespace ecgopt {

namespace {

struct Wave {
    double center; // seconds relative to the beat annotation
    double width;  // gaussian sigma, seconds
    double amplitude;
};

// Morphology templates for N, L, R, A, V in that order.
const std::vector<std::vector<Wave>> kTemplates = {
    // N: normal P-QRS-T
    {{-0.17, 0.025, 0.12}, {-0.035, 0.010, -0.10}, {0.0, 0.014, 1.00},
     {0.035, 0.012, -0.18}, {0.22, 0.060, 0.30}},
    // L: wide notched complex, discordant T
    {{-0.20, 0.025, 0.10}, {-0.02, 0.040, 0.62}, {0.05, 0.045, 0.78}, {0.30, 0.070, -0.26}},
    // R: rSR' with a deep S
    {{-0.17, 0.025, 0.12}, {-0.045, 0.012, 0.34}, {0.0, 0.012, -0.34}, {0.05, 0.022, 0.88},
     {0.24, 0.060, 0.22}},
    // A: early inverted P, narrow complex
    {{-0.11, 0.020, -0.20}, {0.0, 0.013, 0.92}, {0.035, 0.011, -0.15}, {0.20, 0.055, 0.28}},
    // V: no P, large wide complex, inverted T
    {{-0.05, 0.030, -0.35}, {0.012, 0.055, 1.50}, {0.28, 0.080, -0.45}},
};

} // namespace

SynthRecording synthesize_recording(const SynthOptions& opts, const std::string& name) {
    if (opts.beats_per_class < 1) throw ConfigError("beats_per_class must be >= 1");
    if (opts.sampling_rate <= 0.0) throw ConfigError("sampling rate must be > 0");

    const int class_count = static_cast<int>(kTemplates.size());
    Rng rng(opts.seed);

    std::vector<int> beat_labels;
    beat_labels.reserve(static_cast<std::size_t>(opts.beats_per_class) * class_count);
    for (int c = 0; c < class_count; ++c)
        for (int i = 0; i < opts.beats_per_class; ++i) beat_labels.push_back(c);
    rng.shuffle(beat_labels);

    const double sr = opts.sampling_rate;
    const long long margin = std::llround(1.2 * sr);
    std::vector<long long> centers;
    centers.reserve(beat_labels.size());
    long long pos = margin;
    for (std::size_t i = 0; i < beat_labels.size(); ++i) {
        centers.push_back(pos);
        pos += std::llround(sr * rng.uniform(1.3, 1.7));
    }
    const long long length = pos + margin;

    std::vector<double> mv(length, 0.0);
    const double wander_phase = rng.uniform(0.0, 2.0 * M_PI);
    for (long long t = 0; t < length; ++t)
        mv[t] = 0.08 * std::sin(2.0 * M_PI * 0.33 * (t / sr) + wander_phase);

    std::vector<Annotation> annotations;
    annotations.reserve(centers.size());
    const char* symbols = "NLRAV";
    for (std::size_t b = 0; b < centers.size(); ++b) {
        const int label = beat_labels[b];
        const double amp_jitter = rng.uniform(0.85, 1.15);
        const double width_jitter = rng.uniform(0.90, 1.10);
        for (const Wave& w : kTemplates[label]) {
            const double sigma = w.width * width_jitter;
            const double span = 4.0 * sigma;
            const long long lo = centers[b] + std::llround((w.center - span) * sr);
            const long long hi = centers[b] + std::llround((w.center + span) * sr);
            for (long long t = std::max<long long>(0, lo); t <= std::min(length - 1, hi); ++t) {
                const double dt = t / sr - (centers[b] / sr + w.center);
                mv[t] += w.amplitude * amp_jitter * std::exp(-0.5 * dt * dt / (sigma * sigma));
            }
        }
        annotations.push_back({centers[b], symbols[label]});
    }

    Recording rec;
    rec.name = name;
    rec.sampling_rate = sr;
    rec.gain = opts.gain;
    rec.channels.assign(2, std::vector<int>(length));
    for (long long t = 0; t < length; ++t) {
        const double v0 = mv[t] + opts.noise_level * (rng.uniform() * 2.0 - 1.0);
        const double v1 = 0.6 * mv[t] + opts.noise_level * (rng.uniform() * 2.0 - 1.0);
        rec.channels[0][t] = static_cast<int>(
            std::clamp(std::llround(1024.0 + v0 * opts.gain), -2048LL, 2047LL));
        rec.channels[1][t] = static_cast<int>(
            std::clamp(std::llround(1024.0 + v1 * opts.gain), -2048LL, 2047LL));
    }
    return {std::move(rec), std::move(annotations)};
}

} // namespace ecgopt
