#include "sonn/metrics.hpp"

#include "sonn/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace sonn {

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
    return s;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t pred) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < n_; ++t) s += at(t, pred);
    return s;
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t s = 0;
    for (auto c : counts_) s += c;
    return s;
}

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t s = 0;
    for (std::size_t c = 0; c < n_; ++c) s += at(c, c);
    return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.n_ != n_) throw ArgumentError("confusion matrices differ in class count");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels, std::size_t classes) {
    if (preds.size() != labels.size()) throw ArgumentError("prediction and label counts differ");
    ConfusionMatrix cm(classes);
    const int n = static_cast<int>(classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 0 || preds[i] >= n || labels[i] < 0 || labels[i] >= n) {
            throw ArgumentError("class id out of range at position " + std::to_string(i));
        }
        ++cm.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(preds[i]));
    }
    return cm;
}

double EvalReport::mean_f1() const {
    if (per_class.empty()) return 0.0;
    double s = 0.0;
    for (const auto& m : per_class) s += m.f1;
    return s / static_cast<double>(per_class.size());
}

EvalReport per_class(const ConfusionMatrix& cm) {
    EvalReport rep{cm, {}, 0.0};
    rep.per_class.resize(cm.classes());
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const auto actual = static_cast<double>(cm.row_sum(c));
        const auto predicted = static_cast<double>(cm.column_sum(c));
        auto& m = rep.per_class[c];
        m.sensitivity = actual > 0 ? tp / actual : 0.0;
        m.precision = predicted > 0 ? tp / predicted : 0.0;
        const double denom = m.sensitivity + m.precision;
        m.f1 = denom > 0 ? 2.0 * m.precision * m.sensitivity / denom : 0.0;
    }
    const auto total = cm.total();
    rep.accuracy = total > 0 ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
    return rep;
}

EvalReport average_reports(std::span<const EvalReport> reports) {
    if (reports.empty()) throw ArgumentError("cannot average an empty set of reports");
    const std::size_t n = reports.front().matrix.classes();
    EvalReport avg{ConfusionMatrix(n), std::vector<ClassMetrics>(n), 0.0};
    for (const auto& r : reports) {
        avg.matrix += r.matrix;
        avg.accuracy += r.accuracy;
        for (std::size_t c = 0; c < n; ++c) {
            avg.per_class[c].sensitivity += r.per_class.at(c).sensitivity;
            avg.per_class[c].precision += r.per_class.at(c).precision;
            avg.per_class[c].f1 += r.per_class.at(c).f1;
        }
    }
    const double k = static_cast<double>(reports.size());
    avg.accuracy /= k;
    for (auto& m : avg.per_class) {
        m.sensitivity /= k;
        m.precision /= k;
        m.f1 /= k;
    }
    return avg;
}

void write_report_table(const EvalReport& rep, std::span<const std::string> class_names, std::ostream& out) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %8s %8s %8s\n", "class", "Sen", "Ppr", "F1");
    out << line;
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const auto& m = rep.per_class[c];
        const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
        std::snprintf(line, sizeof line, "%-12s %8.4f %8.4f %8.4f\n", name.c_str(), m.sensitivity, m.precision, m.f1);
        out << line;
    }
    std::snprintf(line, sizeof line, "accuracy %.4f  mean F1 %.4f\n", rep.accuracy, rep.mean_f1());
    out << line;
}

void write_report_csv(const EvalReport& rep, std::span<const std::string> class_names, std::ostream& out,
                      bool header, const std::string& tag) {
    if (header) {
        if (!tag.empty()) out << "tag,";
        for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
            const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
            out << name << "_sen," << name << "_ppr," << name << "_f1,";
        }
        out << "accuracy\n";
    }
    char buf[40];
    if (!tag.empty()) out << tag << ',';
    for (const auto& m : rep.per_class) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,", m.sensitivity, m.precision, m.f1);
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.6f\n", rep.accuracy);
    out << buf;
}

void write_confusion_table(const ConfusionMatrix& cm, std::span<const std::string> class_names, std::ostream& out) {
    auto name = [&](std::size_t c) { return c < class_names.size() ? class_names[c] : std::to_string(c); };
    char cell[32];
    std::snprintf(cell, sizeof cell, "%-12s", "truth\\pred");
    out << cell;
    for (std::size_t p = 0; p < cm.classes(); ++p) {
        std::snprintf(cell, sizeof cell, " %9s", name(p).c_str());
        out << cell;
    }
    out << '\n';
    for (std::size_t t = 0; t < cm.classes(); ++t) {
        std::snprintf(cell, sizeof cell, "%-12s", name(t).c_str());
        out << cell;
        for (std::size_t p = 0; p < cm.classes(); ++p) {
            std::snprintf(cell, sizeof cell, " %9llu", static_cast<unsigned long long>(cm.at(t, p)));
            out << cell;
        }
        out << '\n';
    }
}

}  // namespace sonn
