#include "ecgopt/ecg_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ecgopt/rng.hpp"

namespace ecgopt {

ClassSet::ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw ConfigError("class set must not be empty");
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw ConfigError("class names must not be empty");
        for (std::size_t j = 0; j < i; ++j)
            if (names_[j] == names_[i])
                throw ConfigError("duplicate class name '" + names_[i] + "'");
    }
}

int ClassSet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return -1;
}

int ClassSet::index_of(char symbol) const { return index_of(std::string(1, symbol)); }

std::pair<std::vector<int>, std::vector<int>> decode_wfdb212(const std::vector<std::uint8_t>& bytes,
                                                             std::size_t sample_count) {
    const std::size_t needed = (sample_count * 3 + 1) / 2;
    if (bytes.size() < needed)
        throw DataError("format-212 stream truncated: need " + std::to_string(needed) +
                        " bytes for " + std::to_string(sample_count) + " samples, have " +
                        std::to_string(bytes.size()) + " (missing from byte offset " +
                        std::to_string(bytes.size()) + ")");
    std::vector<int> first((sample_count + 1) / 2);
    std::vector<int> second(sample_count / 2);
    for (std::size_t g = 0; g * 2 < sample_count; ++g) {
        const std::uint8_t b0 = bytes[g * 3];
        const std::uint8_t b1 = bytes[g * 3 + 1];
        int s1 = ((b1 & 0x0f) << 8) | b0;
        if (s1 >= 2048) s1 -= 4096;
        first[g] = s1;
        if (g * 2 + 1 < sample_count) {
            const std::uint8_t b2 = bytes[g * 3 + 2];
            int s2 = ((b1 & 0xf0) << 4) | b2;
            if (s2 >= 2048) s2 -= 4096;
            second[g] = s2;
        }
    }
    return {std::move(first), std::move(second)};
}

std::vector<std::uint8_t> encode_wfdb212(const std::vector<int>& first,
                                         const std::vector<int>& second) {
    if (second.size() != first.size() && second.size() + 1 != first.size())
        throw ShapeError("format-212 streams must interleave: second stream may be at most one "
                         "sample shorter");
    auto pack = [](int v) -> unsigned {
        if (v < -2048 || v > 2047)
            throw DataError("sample " + std::to_string(v) + " outside the 12-bit range");
        return static_cast<unsigned>(v < 0 ? v + 4096 : v);
    };
    std::vector<std::uint8_t> bytes;
    bytes.reserve((first.size() + second.size()) / 2 * 3 + 2);
    for (std::size_t g = 0; g < first.size(); ++g) {
        const unsigned s1 = pack(first[g]);
        bytes.push_back(static_cast<std::uint8_t>(s1 & 0xff));
        if (g < second.size()) {
            const unsigned s2 = pack(second[g]);
            bytes.push_back(static_cast<std::uint8_t>(((s1 >> 8) & 0x0f) | ((s2 >> 4) & 0xf0)));
            bytes.push_back(static_cast<std::uint8_t>(s2 & 0xff));
        } else {
            bytes.push_back(static_cast<std::uint8_t>((s1 >> 8) & 0x0f));
        }
    }
    return bytes;
}

Recording read_wfdb212_recording(const std::string& path, const std::string& name,
                                 long long sample_count, int channel_count, double gain,
                                 double sampling_rate) {
    if (channel_count != 2)
        throw ConfigError("format-212 recordings carry 2 interleaved channels, got " +
                          std::to_string(channel_count));
    if (sample_count < 2) throw ConfigError("sample count must be >= 2");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open signal file '" + path + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    auto [a, b] = decode_wfdb212(bytes, static_cast<std::size_t>(sample_count));
    Recording rec;
    rec.name = name;
    rec.channels.push_back(std::move(a));
    rec.channels.push_back(std::move(b));
    rec.sampling_rate = sampling_rate;
    rec.gain = gain;
    return rec;
}

void write_wfdb212_recording(const Recording& rec, const std::string& path) {
    if (rec.channels.size() != 2)
        throw ShapeError("format-212 writer needs exactly 2 channels, got " +
                         std::to_string(rec.channels.size()));
    const auto bytes = encode_wfdb212(rec.channels[0], rec.channels[1]);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("failed writing '" + path + "'");
}

std::vector<Annotation> read_annotations(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open annotation file '" + path + "'");
    std::vector<Annotation> out;
    std::string line;
    long long line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::istringstream ss(line);
        long long index;
        std::string symbol;
        if (!(ss >> index)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue; // blank
            throw DataError(path + ":" + std::to_string(line_no) + ": expected a sample index");
        }
        if (!(ss >> symbol) || symbol.size() != 1)
            throw DataError(path + ":" + std::to_string(line_no) +
                            ": expected a single-character symbol after the index");
        if (index < 0)
            throw DataError(path + ":" + std::to_string(line_no) + ": negative sample index");
        out.push_back({index, symbol[0]});
    }
    return out;
}

void write_annotations(const std::vector<Annotation>& annotations, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    for (const auto& a : annotations) f << a.sample_index << ' ' << a.symbol << '\n';
    if (!f) throw DataError("failed writing '" + path + "'");
}

std::vector<BeatSegment> segment_beats(const Recording& rec,
                                       const std::vector<Annotation>& annotations,
                                       int window_length, const ClassSet& keep) {
    if (window_length < 1) throw ConfigError("window length must be >= 1");
    if (rec.channels.empty()) throw DataError("recording '" + rec.name + "' has no channels");
    const std::vector<int>& signal = rec.channels[0];
    const long long len = static_cast<long long>(signal.size());
    const long long half = window_length / 2;

    std::vector<BeatSegment> out;
    for (const auto& ann : annotations) {
        const int label = keep.index_of(ann.symbol);
        if (label < 0) continue;
        const long long lo = ann.sample_index - half;
        const long long hi = lo + window_length;
        if (lo < 0 || hi > len) continue; // window crosses the recording boundary
        BeatSegment seg;
        seg.values.resize(window_length);
        for (int i = 0; i < window_length; ++i) seg.values[i] = static_cast<double>(signal[lo + i]);
        seg.label = label;
        seg.source_record = rec.name;
        seg.center_index = ann.sample_index;
        out.push_back(std::move(seg));
    }
    if (out.empty())
        throw DataError("recording '" + rec.name + "' produced no usable beats for the " +
                        std::to_string(window_length) + "-sample window");
    return out;
}

BeatSegment normalize_segment(BeatSegment seg) {
    const std::size_t n = seg.values.size();
    double mean = 0.0;
    for (double v : seg.values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : seg.values) var += (v - mean) * (v - mean);
    const double sd = std::max(std::sqrt(var / static_cast<double>(n)), 1e-8);
    for (double& v : seg.values) v = (v - mean) / sd;
    return seg;
}

SplitDataset split(std::vector<BeatSegment> segments, double f_train, double f_validation,
                   double f_test, std::uint64_t seed) {
    if (segments.size() < 10)
        throw DataError("need at least 10 segments to split, got " +
                        std::to_string(segments.size()));
    if (std::abs(f_train + f_validation + f_test - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    if (f_train <= 0.0 || f_validation < 0.0 || f_test < 0.0)
        throw ConfigError("split fractions must be non-negative with a positive train share");

    const long long n = static_cast<long long>(segments.size());
    std::vector<int> order(segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng rng(seed);
    rng.shuffle(order);

    const long long n_train = std::lround(f_train * static_cast<double>(n));
    const long long rest = n - n_train;
    const double denom = f_validation + f_test;
    const long long n_val =
        denom > 0.0 ? std::lround(static_cast<double>(rest) * f_validation / denom) : 0;

    SplitDataset out;
    out.seed = seed;
    for (long long i = 0; i < n; ++i) {
        BeatSegment& seg = segments[order[i]];
        if (i < n_train)
            out.train.push_back(std::move(seg));
        else if (i < n_train + n_val)
            out.validation.push_back(std::move(seg));
        else
            out.test.push_back(std::move(seg));
    }
    return out;
}

std::vector<BeatSegment> load_segments_csv(const std::string& path, const ClassSet& classes) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open segment file '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw DataError(path + ":1: empty file, expected a header");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "label")
        throw DataError(path + ":1: header must be label,v0,...,v{W-1}");
    const int width = static_cast<int>(header.size()) - 1;
    for (int i = 0; i < width; ++i)
        if (header[i + 1] != "v" + std::to_string(i))
            throw DataError(path + ":1: expected column 'v" + std::to_string(i) + "', found '" +
                            header[i + 1] + "'");

    std::vector<BeatSegment> out;
    long long line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (!std::getline(ss, cell, ','))
            throw DataError(path + ":" + std::to_string(line_no) + ": missing label");
        BeatSegment seg;
        seg.label = classes.index_of(cell);
        if (seg.label < 0)
            throw DataError(path + ":" + std::to_string(line_no) + ": unknown label '" + cell +
                            "'");
        seg.values.reserve(width);
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw DataError(path + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                                cell + "'");
            seg.values.push_back(v);
        }
        if (static_cast<int>(seg.values.size()) != width)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(width) + " values, found " +
                            std::to_string(seg.values.size()));
        seg.source_record = path;
        out.push_back(std::move(seg));
    }
    return out;
}

void save_segments_csv(const std::vector<BeatSegment>& segments, const ClassSet& classes,
                       const std::string& path) {
    if (segments.empty()) throw DataError("refusing to write an empty segment file");
    const std::size_t width = segments[0].values.size();
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "label";
    for (std::size_t i = 0; i < width; ++i) f << ",v" << i;
    f << '\n';
    char buf[32];
    for (const auto& seg : segments) {
        if (seg.values.size() != width)
            throw ShapeError("segment width mismatch while writing '" + path + "'");
        if (seg.label < 0 || seg.label >= classes.size())
            throw DataError("segment label out of range while writing '" + path + "'");
        f << classes.names()[seg.label];
        for (double v : seg.values) {
            std::snprintf(buf, sizeof(buf), ",%.12g", v);
            f << buf;
        }
        f << '\n';
    }
    if (!f) throw DataError("failed writing '" + path + "'");
}

LabeledSet to_labeled_set(const std::vector<BeatSegment>& segments) {
    LabeledSet set;
    if (segments.empty()) return set;
    set.width = static_cast<int>(segments[0].values.size());
    set.values.reserve(segments.size() * segments[0].values.size());
    for (const auto& seg : segments) {
        if (static_cast<int>(seg.values.size()) != set.width)
            throw ShapeError("segments have inconsistent widths");
        set.add_row(seg.values.data(), seg.label);
    }
    return set;
}

} // namespace ecgopt
