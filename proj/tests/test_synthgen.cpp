#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sonn/errors.hpp"
#include "sonn/kv_config.hpp"
#include "sonn/synthgen.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace sonn;

namespace {

constexpr double kRate = 20480.0;
constexpr std::size_t kN = 16384;
constexpr double kDuration = static_cast<double>(kN) / kRate;

BearingGeometry test_geometry() {
    BearingGeometry g;
    g.balls = 16;
    g.pitch_diameter = 1.0;
    g.ball_diameter = 0.1176;
    g.contact_angle = 0.2648;
    g.shaft_hz = 2000.0 / 60.0;
    return g;
}

std::vector<double> x_channel(Severity cls, const SeverityProfile& p, FaultKind kind = FaultKind::InnerRace,
                              std::uint64_t seed = 7) {
    return synthesize(test_geometry(), kind, cls, p, kDuration, kRate, seed).channels[0].samples;
}

}  // namespace

TEST_CASE("cage frequency") {
    BearingGeometry g = test_geometry();
    CHECK(cage_frequency(g) == doctest::Approx(14.77).epsilon(5e-4));
    const double direct = 0.5 * g.shaft_hz * (1.0 - 0.1176 * std::cos(0.2648));
    CHECK(cage_frequency(g) == doctest::Approx(direct).epsilon(1e-14));

    g.contact_angle = std::numbers::pi / 2;
    CHECK(cage_frequency(g) == doctest::Approx(g.shaft_hz / 2).epsilon(1e-14));

    g = test_geometry();
    g.ball_diameter = 1e-12 * g.pitch_diameter;
    CHECK(std::abs(cage_frequency(g) - g.shaft_hz / 2) < 1e-9);
}

TEST_CASE("inner race defect frequency") {
    BearingGeometry g = test_geometry();
    CHECK(inner_race_defect_frequency(g) == doctest::Approx(296.9).epsilon(5e-4));
    CHECK(inner_race_defect_frequency(g) > g.balls * g.shaft_hz / 2);

    g.contact_angle = std::numbers::pi / 2;
    CHECK(inner_race_defect_frequency(g) == doctest::Approx(8 * g.shaft_hz).epsilon(1e-14));

    g = test_geometry();
    g.ball_diameter = 1e-12;
    CHECK(inner_race_defect_frequency(g) == doctest::Approx(8 * g.shaft_hz).epsilon(1e-10));
}

TEST_CASE("ball defect frequency") {
    BearingGeometry g = test_geometry();
    CHECK(ball_defect_frequency(g) == doctest::Approx(139.8).epsilon(1e-3));
    const double ratio = 1.0 / 0.1176;
    const double c = std::cos(0.2648);
    CHECK(ball_defect_frequency(g) ==
          doctest::Approx(ratio / 2 * g.shaft_hz * (1 - 0.1176 * 0.1176 * c * c)).epsilon(1e-14));

    g.contact_angle = std::numbers::pi / 2;
    CHECK(ball_defect_frequency(g) == doctest::Approx(ratio / 2 * g.shaft_hz).epsilon(1e-14));

    g = test_geometry();
    g.ball_diameter = 1e-9;
    CHECK(ball_defect_frequency(g) / (g.pitch_diameter / (2 * g.ball_diameter) * g.shaft_hz) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("frequency ordering holds across random geometries") {
    oracle::Rng rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        BearingGeometry g;
        g.balls = 2 + static_cast<int>(u(rng) * 30);
        g.pitch_diameter = 0.5 + 5 * u(rng);
        g.ball_diameter = g.pitch_diameter * (0.01 + 0.9 * u(rng));
        g.contact_angle = u(rng) * std::numbers::pi / 2;
        g.shaft_hz = 1 + 100 * u(rng);
        CHECK(cage_frequency(g) < g.shaft_hz);
        CHECK(cage_frequency(g) > 0.0);
        CHECK(cage_frequency(g) <= g.shaft_hz / 2);
        CHECK(g.shaft_hz < inner_race_defect_frequency(g));
        CHECK(ball_defect_frequency(g) > 0.0);
    }
}

TEST_CASE("geometry invariants are enforced") {
    BearingGeometry g = test_geometry();
    g.ball_diameter = 2.0;
    CHECK_THROWS_AS(g.validate(), ArgumentError);
    g = test_geometry();
    g.balls = 0;
    CHECK_THROWS_AS(g.validate(), ArgumentError);
    g = test_geometry();
    g.contact_angle = 2.0;
    CHECK_THROWS_AS(g.validate(), ArgumentError);
}

TEST_CASE("default profile follows the zone pattern") {
    CHECK_NOTHROW(SeverityProfile::defaults().validate_severity_pattern());
    auto p = SeverityProfile::defaults();
    p.classes[1].zone2 = 0.1;
    CHECK_THROWS_AS(p.validate_severity_pattern(), ArgumentError);
}

TEST_CASE("healthy spectrum is flat at the defect frequency") {
    const auto mag = oracle::spectrum(x_channel(Severity::Healthy, SeverityProfile::defaults()));
    const double floor = oracle::median(mag);
    const double f_id = inner_race_defect_frequency(test_geometry());
    CHECK(mag[oracle::bin_of(f_id, kRate, kN)] <= 3.0 * floor);
}

TEST_CASE("severe inner-race spectrum peaks at f_ID and 2 f_ID") {
    const auto mag = oracle::spectrum(x_channel(Severity::SevereFault, SeverityProfile::defaults()));
    const double floor = oracle::median(mag);
    const double f_id = inner_race_defect_frequency(test_geometry());
    CHECK(oracle::peak_near(mag, f_id, kRate, kN) >= 10.0 * floor);
    CHECK(oracle::peak_near(mag, 2 * f_id, kRate, kN) >= 10.0 * floor);
}

TEST_CASE("zone presence is detectable per class") {
    SeverityProfile p = SeverityProfile::defaults();
    p.recording_jitter = 0.0;
    p.impulse_jitter = 0.0;
    const double f_shaft = test_geometry().shaft_hz;
    const double f_id = inner_race_defect_frequency(test_geometry());

    struct Peaks {
        double zone1, zone2, zone3;
    };
    auto peaks = [&](Severity cls) {
        const auto mag = oracle::spectrum(x_channel(cls, p));
        const double floor = oracle::median(mag);
        // Periodic rings show up as lines at defect harmonics near the resonance.
        const std::size_t lo = oracle::bin_of(p.resonance_hz - 300, kRate, kN);
        const std::size_t hi = oracle::bin_of(p.resonance_hz + 300, kRate, kN);
        double band = 0.0;
        for (std::size_t b = lo; b <= hi; ++b) band = std::max(band, mag[b]);
        return Peaks{oracle::peak_near(mag, f_shaft, kRate, kN) / floor,
                     oracle::peak_near(mag, f_id, kRate, kN, 1) / floor, band / floor};
    };
    const Peaks h = peaks(Severity::Healthy);
    const Peaks e = peaks(Severity::EarlyFault);
    const Peaks m = peaks(Severity::ModerateFault);
    const Peaks s = peaks(Severity::SevereFault);
    // Rings are periodic at the defect rate, so they leak a little into the
    // defect-harmonic bins; one threshold well above that leak decides presence.
    const double present = 20.0;
    const double absent = present;

    CHECK(h.zone1 > present);
    CHECK(h.zone2 < absent);
    CHECK(h.zone3 < absent);
    CHECK(e.zone1 > present);
    CHECK(e.zone2 < absent);
    CHECK(e.zone3 > present);
    for (const Peaks* z : {&m, &s}) {
        CHECK(z->zone1 > present);
        CHECK(z->zone2 > present);
        CHECK(z->zone3 > present);
    }

    // Same seed, compare absolute magnitudes.
    const auto mm = oracle::spectrum(x_channel(Severity::ModerateFault, p));
    const auto ms = oracle::spectrum(x_channel(Severity::SevereFault, p));
    CHECK(oracle::peak_near(ms, f_id, kRate, kN) > oracle::peak_near(mm, f_id, kRate, kN));
    double band_m = 0.0;
    double band_s = 0.0;
    for (std::size_t b = oracle::bin_of(3700, kRate, kN); b <= oracle::bin_of(4300, kRate, kN); ++b) {
        band_m += mm[b];
        band_s += ms[b];
    }
    CHECK(band_s > band_m);
}

TEST_CASE("rolling-element faults move zone II to the ball defect frequency") {
    SeverityProfile p = SeverityProfile::defaults();
    const auto mag = oracle::spectrum(x_channel(Severity::SevereFault, p, FaultKind::RollingElement));
    const double floor = oracle::median(mag);
    CHECK(oracle::peak_near(mag, ball_defect_frequency(test_geometry()), kRate, kN) >= 10.0 * floor);
}

TEST_CASE("zone II amplitude raises the f_ID magnitude monotonically") {
    SeverityProfile p = SeverityProfile::defaults();
    p.recording_jitter = 0.0;
    const double f_id = inner_race_defect_frequency(test_geometry());
    double last = 0.0;
    for (double a : {0.1, 0.2, 0.4, 0.8, 1.6}) {
        p.classes[2].zone2 = a;
        const auto mag = oracle::spectrum(x_channel(Severity::ModerateFault, p));
        const double here = oracle::peak_near(mag, f_id, kRate, kN, 0);
        CHECK(here > last);
        last = here;
    }
}

TEST_CASE("zero profile and zero noise give silence") {
    SeverityProfile p;
    const auto rec = synthesize(test_geometry(), FaultKind::InnerRace, Severity::SevereFault, p, 0.1, kRate, 1);
    for (const auto& ch : rec.channels)
        for (double v : ch.samples) CHECK(v == 0.0);
}

TEST_CASE("identical inputs give identical recordings; seeds matter") {
    const auto p = SeverityProfile::defaults();
    const auto a = x_channel(Severity::ModerateFault, p, FaultKind::InnerRace, 5);
    const auto b = x_channel(Severity::ModerateFault, p, FaultKind::InnerRace, 5);
    const auto c = x_channel(Severity::ModerateFault, p, FaultKind::InnerRace, 6);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("zone I is a quarter period apart on the two axes") {
    SeverityProfile p;
    p.classes[0].zone1 = 1.0;
    p.shaft_harmonics = 1;
    const auto rec = synthesize(test_geometry(), FaultKind::InnerRace, Severity::Healthy, p, 1.0, kRate, 3);
    // x = sin(wt + ph), y = sin(wt + ph + pi/2): x^2 + y^2 = 1 everywhere.
    for (std::size_t t = 0; t < rec.length(); t += 101) {
        const double x = rec.channels[0].samples[t];
        const double y = rec.channels[1].samples[t];
        CHECK(x * x + y * y == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("nyquist violations name the offending frequency") {
    auto p = SeverityProfile::defaults();
    try {
        synthesize(test_geometry(), FaultKind::InnerRace, Severity::EarlyFault, p, 0.1, 6000.0, 1);
        FAIL("expected an argument error");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("4000") != std::string::npos);
    }
    CHECK_THROWS_AS(synthesize(test_geometry(), FaultKind::InnerRace, Severity::SevereFault, p, 0.1, 2500.0, 1),
                    ArgumentError);
    CHECK_THROWS_AS(synthesize(test_geometry(), FaultKind::InnerRace, Severity::Healthy, p, 0.0, kRate, 1),
                    ArgumentError);
}

TEST_CASE("profile and geometry read from key-value config") {
    std::istringstream text("geometry.balls = 9\nprofile.severe.zone2 = 2.5\nprofile.resonance_hz = 3000\n");
    const auto kv = KvConfig::parse(text);
    CHECK(geometry_from_config(kv).balls == 9);
    const auto p = profile_from_config(kv);
    CHECK(p.classes[3].zone2 == 2.5);
    CHECK(p.resonance_hz == 3000.0);
    CHECK(p.classes[0].zone1 == SeverityProfile::defaults().classes[0].zone1);
}
