#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sonn/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace sonn;

namespace {

ConfusionMatrix from_rows(const std::vector<std::vector<std::uint64_t>>& rows) {
    ConfusionMatrix cm(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t p = 0; p < rows.size(); ++p) cm.at(t, p) = rows[t][p];
    return cm;
}

}  // namespace

TEST_CASE("confusion places truth on rows and predictions on columns") {
    const std::vector<int> labels{0, 1, 2, 3, 3};
    const std::vector<int> preds{0, 1, 2, 3, 0};
    const auto cm = confusion(preds, labels);
    CHECK(cm.at(3, 0) == 1);
    CHECK(cm.at(3, 3) == 1);
    CHECK(cm.trace() == 4);
    CHECK(cm.total() == 5);
}

TEST_CASE("all predictions class 0 populate only column 0") {
    const std::vector<int> labels{0, 1, 2, 3, 1};
    const std::vector<int> preds(5, 0);
    const auto cm = confusion(preds, labels);
    CHECK(cm.column_sum(0) == 5);
    for (std::size_t c = 1; c < 4; ++c) CHECK(cm.column_sum(c) == 0);
}

TEST_CASE("empty input gives a zero matrix") {
    const auto cm = confusion({}, {});
    CHECK(cm.total() == 0);
    const auto rep = per_class(cm);
    CHECK(rep.accuracy == 0.0);
}

TEST_CASE("mismatched lengths and out-of-range labels are rejected") {
    const std::vector<int> a{0, 1};
    const std::vector<int> b{0};
    CHECK_THROWS(confusion(a, b));
    const std::vector<int> bad{4, 0};
    CHECK_THROWS(confusion(bad, a));
}

TEST_CASE("inner-race Q=7 matrix reproduces Sen/Ppr/F1 for the early class") {
    // Rows: healthy, early, moderate, severe. Early: TP 389, FN 11, FP 6.
    const auto cm = from_rows({{400, 0, 0, 0}, {0, 389, 11, 0}, {0, 6, 394, 0}, {0, 0, 0, 400}});
    const auto rep = per_class(cm);
    CHECK(rep.per_class[1].sensitivity == doctest::Approx(389.0 / 400.0).epsilon(1e-15));
    CHECK(std::round(rep.per_class[1].sensitivity * 1e5) == 97250.0);
    CHECK(std::round(rep.per_class[1].precision * 1e5) == 98481.0);
    CHECK(std::round(rep.per_class[1].f1 * 1e5) == 97862.0);
}

TEST_CASE("identity matrix gives perfect metrics") {
    const auto rep = per_class(from_rows({{5, 0, 0, 0}, {0, 5, 0, 0}, {0, 0, 5, 0}, {0, 0, 0, 5}}));
    for (const auto& m : rep.per_class) {
        CHECK(m.sensitivity == 1.0);
        CHECK(m.precision == 1.0);
        CHECK(m.f1 == 1.0);
    }
    CHECK(rep.accuracy == 1.0);
}

TEST_CASE("class never hit and never predicted scores zero") {
    const auto rep = per_class(from_rows({{3, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 4}}));
    CHECK(rep.per_class[2].sensitivity == 0.0);
    CHECK(rep.per_class[2].precision == 0.0);
    CHECK(rep.per_class[2].f1 == 0.0);
}

TEST_CASE("random matrices satisfy the metric invariants") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(0, 30);
    for (int trial = 0; trial < 200; ++trial) {
        ConfusionMatrix cm(4);
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < 4; ++p) cm.at(t, p) = static_cast<std::uint64_t>(d(rng) * (d(rng) > 8));
        const auto rep = per_class(cm);
        const bool diagonal = cm.trace() == cm.total();
        CHECK((rep.accuracy == 1.0) == (diagonal && cm.total() > 0));
        for (const auto& m : rep.per_class) {
            CHECK(m.sensitivity >= 0.0);
            CHECK(m.sensitivity <= 1.0);
            CHECK(m.precision >= 0.0);
            CHECK(m.precision <= 1.0);
            CHECK(m.f1 <= (m.sensitivity + m.precision) / 2.0 + 1e-15);
            CHECK((m.f1 == 0.0) == (m.sensitivity * m.precision == 0.0));
            if (m.f1 > 0.0)
                CHECK(m.f1 == doctest::Approx(2 * m.sensitivity * m.precision / (m.sensitivity + m.precision)));
        }

        // Relabel classes with a permutation; metrics follow the labels.
        std::array<std::size_t, 4> perm{0, 1, 2, 3};
        std::shuffle(perm.begin(), perm.end(), rng);
        ConfusionMatrix moved(4);
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t p = 0; p < 4; ++p) moved.at(perm[t], perm[p]) = cm.at(t, p);
        const auto rep2 = per_class(moved);
        for (std::size_t c = 0; c < 4; ++c) CHECK(rep2.per_class[perm[c]] == rep.per_class[c]);
    }
}

TEST_CASE("average_reports means metrics and sums matrices") {
    const auto a = per_class(from_rows({{2, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}}));
    const auto b = per_class(from_rows({{1, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 2}}));
    const std::vector<EvalReport> both{a, b};
    const auto avg = average_reports(both);
    CHECK(avg.matrix.total() == 16);
    CHECK(avg.accuracy == doctest::Approx((1.0 + 7.0 / 8.0) / 2.0));
    CHECK(avg.per_class[0].sensitivity == doctest::Approx(0.75));
}

TEST_CASE("text and csv renderings list Sen, Ppr, F1 per class") {
    const auto rep = per_class(from_rows({{4, 0, 0, 0}, {0, 3, 1, 0}, {0, 0, 4, 0}, {0, 0, 0, 4}}));
    const std::vector<std::string> names{"healthy", "early", "moderate", "severe"};
    std::ostringstream text;
    write_report_table(rep, names, text);
    CHECK(text.str().find("Sen") != std::string::npos);
    CHECK(text.str().find("early") != std::string::npos);
    std::ostringstream csv;
    write_report_csv(rep, names, csv, true, "x");
    const auto s = csv.str();
    CHECK(s.find("early_sen,early_ppr,early_f1") != std::string::npos);
    CHECK(std::count(s.begin(), s.end(), '\n') >= 2);
}
