#pragma once

#include <cstdint>

#include "ecgopt/ecg_data.hpp"

namespace ecgopt {

// Synthetic five-class ECG generator for demos and end-to-end tests. Each
// class has a distinct beat morphology (narrow normal complex, wide notched
// left-block complex, rSR' right-block complex, early inverted-P atrial beat,
// large wide ventricular beat) plus per-beat jitter, additive noise and a
// slow baseline drift.
struct SynthOptions {
    int beats_per_class = 400;
    double sampling_rate = 128.0;
    double noise_level = 0.04; // mV, additive white noise
    double gain = 200.0;       // ADC units per mV
    std::uint64_t seed = 1;
};

struct SynthRecording {
    Recording recording;
    std::vector<Annotation> annotations;
};

SynthRecording synthesize_recording(const SynthOptions& opts, const std::string& name = "synth");

} // namespace ecgopt
