#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ecgopt/dataset.hpp"

namespace ecgopt {

// Raw multichannel recording in ADC units.
struct Recording {
    std::string name;
    std::vector<std::vector<int>> channels;
    double sampling_rate = 360.0;
    double gain = 200.0; // ADC units per mV
};

struct Annotation {
    long long sample_index;
    char symbol;
};

// Ordered class alphabet; beat labels are indices into it.
class ClassSet {
public:
    explicit ClassSet(std::vector<std::string> names);
    static ClassSet defaults() { return ClassSet({"N", "L", "R", "A", "V"}); }

    const std::vector<std::string>& names() const { return names_; }
    int size() const { return static_cast<int>(names_.size()); }
    int index_of(const std::string& name) const; // -1 when absent
    int index_of(char symbol) const;

private:
    std::vector<std::string> names_;
};

// One annotation-centred window with its class label.
struct BeatSegment {
    std::vector<double> values;
    int label = -1;
    std::string source_record;
    long long center_index = 0;
};

struct SplitDataset {
    std::vector<BeatSegment> train;
    std::vector<BeatSegment> validation;
    std::vector<BeatSegment> test;
    std::uint64_t seed = 0;
};

// Format 212: each 3-byte group packs two 12-bit two's-complement samples,
//   s1 = (b1 & 0x0f) << 8 | b0,   s2 = (b1 & 0xf0) << 4 | b2,
// with values >= 2048 mapping to value - 4096. `sample_count` is the total
// over both streams; sample 2g lands in the first stream, 2g+1 in the second.
std::pair<std::vector<int>, std::vector<int>> decode_wfdb212(const std::vector<std::uint8_t>& bytes,
                                                             std::size_t sample_count);

// Exact inverse of decode_wfdb212; the second stream may be one sample
// shorter for an odd total.
std::vector<std::uint8_t> encode_wfdb212(const std::vector<int>& first,
                                         const std::vector<int>& second);

Recording read_wfdb212_recording(const std::string& path, const std::string& name,
                                 long long sample_count, int channel_count, double gain,
                                 double sampling_rate);
void write_wfdb212_recording(const Recording& rec, const std::string& path);

// Plain-text annotations, one "sample_index symbol" pair per line.
std::vector<Annotation> read_annotations(const std::string& path);
void write_annotations(const std::vector<Annotation>& annotations, const std::string& path);

// Windows of `window_length` samples centred on kept annotations, channel 0
// only; windows crossing a recording boundary are dropped.
std::vector<BeatSegment> segment_beats(const Recording& rec,
                                       const std::vector<Annotation>& annotations,
                                       int window_length, const ClassSet& keep);

// Per-segment z-score with the deviation floored at 1e-8.
BeatSegment normalize_segment(BeatSegment seg);

// Seeded shuffle, then contiguous partition: round(f_train * n) first, the
// remainder split by the validation/test ratio (validation gets an odd one).
SplitDataset split(std::vector<BeatSegment> segments, double f_train, double f_validation,
                   double f_test, std::uint64_t seed);

// CSV with header label,v0,...,v{W-1}; values at 12 significant digits.
std::vector<BeatSegment> load_segments_csv(const std::string& path, const ClassSet& classes);
void save_segments_csv(const std::vector<BeatSegment>& segments, const ClassSet& classes,
                       const std::string& path);

LabeledSet to_labeled_set(const std::vector<BeatSegment>& segments);

} // namespace ecgopt
