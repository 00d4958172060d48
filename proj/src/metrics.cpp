#include "ecgopt/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ecgopt/errors.hpp"

namespace ecgopt {

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (const auto& row : counts)
        for (long long v : row) t += v;
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::vector<std::string>& class_names) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("confusion: " + std::to_string(y_true.size()) + " true labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
    const int k = static_cast<int>(class_names.size());
    ConfusionMatrix cm;
    cm.class_names = class_names;
    cm.counts.assign(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i];
        const int p = y_pred[i];
        if (t < 0 || t >= k || p < 0 || p >= k)
            throw DataError("label pair (" + std::to_string(t) + ", " + std::to_string(p) +
                            ") out of range at sample " + std::to_string(i));
        ++cm.counts[t][p];
    }
    return cm;
}

ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, int cls) {
    const int k = cm.size();
    if (cls < 0 || cls >= k) throw DataError("class index " + std::to_string(cls) + " out of range");
    long long tp = cm.counts[cls][cls];
    long long fp = 0, fn = 0;
    for (int i = 0; i < k; ++i) {
        if (i == cls) continue;
        fp += cm.counts[i][cls];
        fn += cm.counts[cls][i];
    }
    ClassMetrics m;
    if (tp + fn > 0)
        m.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
    else
        m.degenerate = true;
    if (tp + fp > 0)
        m.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
    else
        m.degenerate = true;
    if (2 * tp + fp + fn > 0)
        m.f1 = 100.0 * 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    else
        m.degenerate = true;
    return m;
}

SummaryMetrics summarize(const ConfusionMatrix& cm) {
    SummaryMetrics s;
    const int k = cm.size();
    for (int c = 0; c < k; ++c) {
        const ClassMetrics m = precision_recall_f1(cm, c);
        s.macro_precision += m.precision;
        s.macro_recall += m.recall;
        s.macro_f1 += m.f1;
    }
    s.macro_precision /= k;
    s.macro_recall /= k;
    s.macro_f1 /= k;
    s.accuracy = accuracy_percent(cm);
    return s;
}

double accuracy_percent(const ConfusionMatrix& cm) {
    const long long total = cm.total();
    if (total == 0) return 0.0;
    long long correct = 0;
    for (int i = 0; i < cm.size(); ++i) correct += cm.counts[i][i];
    return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

std::vector<std::vector<double>> normalized_confusion(const ConfusionMatrix& cm) {
    const int k = cm.size();
    std::vector<std::vector<double>> out(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
        long long row_sum = 0;
        for (long long v : cm.counts[i]) row_sum += v;
        if (row_sum == 0) continue;
        for (int j = 0; j < k; ++j)
            out[i][j] = static_cast<double>(cm.counts[i][j]) / static_cast<double>(row_sum);
    }
    return out;
}

void write_metrics_csv(const ConfusionMatrix& cm, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "class,precision,recall,f1\n";
    char buf[128];
    for (int c = 0; c < cm.size(); ++c) {
        const ClassMetrics m = precision_recall_f1(cm, c);
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g\n", cm.class_names[c].c_str(),
                      m.precision, m.recall, m.f1);
        f << buf;
    }
    const SummaryMetrics s = summarize(cm);
    std::snprintf(buf, sizeof(buf), "macro,%.12g,%.12g,%.12g\n", s.macro_precision, s.macro_recall,
                  s.macro_f1);
    f << buf;
    if (!f) throw DataError("failed writing '" + path + "'");
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "true\\pred";
    for (const auto& n : cm.class_names) f << ',' << n;
    f << '\n';
    for (int i = 0; i < cm.size(); ++i) {
        f << cm.class_names[i];
        for (long long v : cm.counts[i]) f << ',' << v;
        f << '\n';
    }
    if (!f) throw DataError("failed writing '" + path + "'");
}

void write_normalized_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    const auto norm = normalized_confusion(cm);
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << "true\\pred";
    for (const auto& n : cm.class_names) f << ',' << n;
    f << '\n';
    char buf[32];
    for (int i = 0; i < cm.size(); ++i) {
        f << cm.class_names[i];
        for (double v : norm[i]) {
            std::snprintf(buf, sizeof(buf), ",%.12g", v);
            f << buf;
        }
        f << '\n';
    }
    if (!f) throw DataError("failed writing '" + path + "'");
}

ConfusionMatrix read_confusion_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open confusion file '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw DataError(path + ": empty confusion file");
    ConfusionMatrix cm;
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ','); // corner label
        while (std::getline(ss, cell, ',')) cm.class_names.push_back(cell);
    }
    const int k = static_cast<int>(cm.class_names.size());
    if (k == 0) throw DataError(path + ": confusion header names no classes");
    long long line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        std::vector<long long> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stoll(cell));
        if (static_cast<int>(row.size()) != k)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(k) + " counts");
        cm.counts.push_back(std::move(row));
    }
    if (static_cast<int>(cm.counts.size()) != k)
        throw DataError(path + ": expected " + std::to_string(k) + " rows, found " +
                        std::to_string(cm.counts.size()));
    return cm;
}

} // namespace ecgopt
