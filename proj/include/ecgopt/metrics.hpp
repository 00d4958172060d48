#pragma once

#include <string>
#include <vector>

namespace ecgopt {

struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::vector<long long>> counts; // rows = true class, columns = predicted

    int size() const { return static_cast<int>(counts.size()); }
    long long total() const;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          const std::vector<std::string>& class_names);

// Percentages. `degenerate` flags a zero denominator, reported as 0.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false;
};

ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, int cls);

struct SummaryMetrics {
    double accuracy = 0.0; // percent
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

SummaryMetrics summarize(const ConfusionMatrix& cm);

double accuracy_percent(const ConfusionMatrix& cm);

// Rows divided by their sums; all-zero rows stay zero.
std::vector<std::vector<double>> normalized_confusion(const ConfusionMatrix& cm);

// class,precision,recall,f1 rows per class, then a macro row.
void write_metrics_csv(const ConfusionMatrix& cm, const std::string& path);
// Raw counts as a grid with named rows/columns.
void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);
void write_normalized_confusion_csv(const ConfusionMatrix& cm, const std::string& path);

ConfusionMatrix read_confusion_csv(const std::string& path);

} // namespace ecgopt
