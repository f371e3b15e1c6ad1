#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sonn {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes = 4) : n_(classes), counts_(classes * classes, 0) {}

    std::size_t classes() const noexcept { return n_; }
    std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * n_ + pred]; }
    std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * n_ + pred]; }

    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t column_sum(std::size_t pred) const;
    std::uint64_t total() const;
    std::uint64_t trace() const;

    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t classes = 4);

struct ClassMetrics {
    double sensitivity = 0.0;  ///< TP / (TP + FN)
    double precision = 0.0;    ///< TP / (TP + FP)
    double f1 = 0.0;

    bool operator==(const ClassMetrics&) const = default;
};

struct EvalReport {
    ConfusionMatrix matrix;
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;

    double mean_f1() const;
    bool operator==(const EvalReport&) const = default;
};

/// Per-class Sen/Ppr/F1. A zero denominator yields 0 for that metric.
EvalReport per_class(const ConfusionMatrix& cm);

/// Arithmetic mean of each metric over `reports`; the matrix is their sum.
EvalReport average_reports(std::span<const EvalReport> reports);

void write_report_table(const EvalReport& rep, std::span<const std::string> class_names, std::ostream& out);
void write_report_csv(const EvalReport& rep, std::span<const std::string> class_names, std::ostream& out,
                      bool header = true, const std::string& tag = "");
void write_confusion_table(const ConfusionMatrix& cm, std::span<const std::string> class_names, std::ostream& out);

}  // namespace sonn
