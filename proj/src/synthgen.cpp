#include "sonn/synthgen.hpp"

#include "sonn/errors.hpp"
#include "sonn/kv_config.hpp"
#include "sonn/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace sonn {

void BearingGeometry::validate() const {
    if (balls < 1) throw ArgumentError("bearing needs at least one rolling element");
    if (!(ball_diameter > 0.0) || !(ball_diameter < pitch_diameter)) {
        throw ArgumentError("bearing geometry requires 0 < ball diameter < pitch diameter");
    }
    if (!(shaft_hz > 0.0)) throw ArgumentError("shaft speed must be positive");
    if (!(contact_angle >= 0.0) || contact_angle > std::numbers::pi / 2) {
        throw ArgumentError("contact angle must lie in [0, pi/2]");
    }
}

FaultKind parse_fault_kind(std::string_view name) {
    if (name == "inner") return FaultKind::InnerRace;
    if (name == "rolling") return FaultKind::RollingElement;
    throw ArgumentError("unknown fault kind '" + std::string(name) + "' (expected inner or rolling)");
}

std::string_view fault_kind_name(FaultKind kind) noexcept {
    return kind == FaultKind::InnerRace ? "inner" : "rolling";
}

double cage_frequency(const BearingGeometry& g) {
    g.validate();
    return 0.5 * g.shaft_hz * (1.0 - g.ball_diameter / g.pitch_diameter * std::cos(g.contact_angle));
}

double inner_race_defect_frequency(const BearingGeometry& g) {
    g.validate();
    return 0.5 * g.balls * g.shaft_hz * (1.0 + g.ball_diameter / g.pitch_diameter * std::cos(g.contact_angle));
}

double ball_defect_frequency(const BearingGeometry& g) {
    g.validate();
    const double ratio = g.ball_diameter / g.pitch_diameter;
    const double c = std::cos(g.contact_angle);
    return g.pitch_diameter / (2.0 * g.ball_diameter) * g.shaft_hz * (1.0 - ratio * ratio * c * c);
}

double defect_frequency(const BearingGeometry& g, FaultKind kind) {
    return kind == FaultKind::InnerRace ? inner_race_defect_frequency(g) : ball_defect_frequency(g);
}

SeverityProfile SeverityProfile::defaults() {
    SeverityProfile p;
    p.classes[0] = {1.0, 0.0, 0.0, 0.30};
    p.classes[1] = {1.0, 0.0, 0.60, 0.30};
    p.classes[2] = {1.0, 0.30, 0.80, 0.30};
    p.classes[3] = {1.0, 0.40, 1.40, 0.30};
    p.recording_jitter = 0.15;
    p.impulse_jitter = 0.8;
    return p;
}

void SeverityProfile::validate() const {
    for (const auto& z : classes) {
        if (!(z.zone1 >= 0.0 && z.zone2 >= 0.0 && z.zone3 >= 0.0 && z.noise >= 0.0)) {
            throw ArgumentError("severity profile amplitudes must be non-negative");
        }
    }
    if (shaft_harmonics == 0 || defect_harmonics == 0) throw ArgumentError("harmonic counts must be positive");
    if (!(resonance_hz > 0.0)) throw ArgumentError("resonance frequency must be positive");
    if (!(ring_decay_s > 0.0)) throw ArgumentError("ring decay constant must be positive");
    if (!(recording_jitter >= 0.0 && recording_jitter < 1.0) || !(impulse_jitter >= 0.0 && impulse_jitter < 1.0)) {
        throw ArgumentError("jitter fractions must lie in [0, 1)");
    }
}

void SeverityProfile::validate_severity_pattern() const {
    validate();
    const auto& h = classes[0];
    const auto& e = classes[1];
    const auto& m = classes[2];
    const auto& s = classes[3];
    if (h.zone2 != 0.0 || h.zone3 != 0.0) throw ArgumentError("healthy profile must have no zone II/III energy");
    if (e.zone2 != 0.0) throw ArgumentError("early-fault profile must have no zone II energy");
    for (const auto* z : {&m, &s}) {
        if (!(z->zone1 > 0.0 && z->zone2 > 0.0 && z->zone3 > 0.0)) {
            throw ArgumentError("moderate and severe profiles must carry energy in all zones");
        }
    }
    if (!(s.zone2 > m.zone2 && s.zone3 > m.zone3)) {
        throw ArgumentError("severe profile must exceed moderate in zones II and III");
    }
}

RawRecording synthesize(const BearingGeometry& g, FaultKind kind, Severity cls, const SeverityProfile& profile,
                        double duration_s, double sample_rate, std::uint64_t seed) {
    g.validate();
    profile.validate();
    if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
    const double samples_real = std::floor(duration_s * sample_rate);
    if (!(samples_real >= 1.0)) throw ArgumentError("duration x sample rate must give at least one sample");
    const auto n = static_cast<std::size_t>(samples_real);

    const ZoneAmplitudes& base = profile.classes.at(static_cast<std::size_t>(cls));
    const double f_shaft = g.shaft_hz;
    const double f_defect = defect_frequency(g, kind);
    const double nyquist = 0.5 * sample_rate;
    auto check_nyquist = [&](double f, const char* what) {
        if (!(f < nyquist)) {
            throw ArgumentError(std::string(what) + " at " + std::to_string(f) + " Hz exceeds the Nyquist limit of " +
                                std::to_string(nyquist) + " Hz");
        }
    };
    if (base.zone1 > 0.0) check_nyquist(f_shaft * static_cast<double>(profile.shaft_harmonics), "shaft harmonic");
    if (base.zone2 > 0.0) check_nyquist(f_defect * static_cast<double>(profile.defect_harmonics), "defect harmonic");
    if (base.zone3 > 0.0) check_nyquist(profile.resonance_hz, "resonance");

    Rng rng(derive_seed({seed, static_cast<std::uint64_t>(cls), static_cast<std::uint64_t>(kind)}));
    auto jittered = [&](double a, double spread) { return a * (1.0 + spread * uniform(rng, -1.0, 1.0)); };
    const ZoneAmplitudes amp{jittered(base.zone1, profile.recording_jitter),
                             jittered(base.zone2, profile.recording_jitter),
                             jittered(base.zone3, profile.recording_jitter), base.noise};

    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double dt = 1.0 / sample_rate;

    RawRecording rec;
    rec.sample_rate = sample_rate;
    rec.source_id = "synth:" + std::string(kSeverityNames[static_cast<std::size_t>(cls)]) + ":" +
                    std::string(fault_kind_name(kind)) + ":" + std::to_string(seed);
    rec.channels = {{"x", std::vector<double>(n, 0.0)}, {"y", std::vector<double>(n, 0.0)}};

    // Zone I: the y channel sees the shaft harmonics a quarter period later.
    std::vector<double> shaft_phase(profile.shaft_harmonics);
    for (auto& ph : shaft_phase) ph = uniform(rng, 0.0, two_pi);
    // Zone II: independent phase per channel and harmonic.
    std::vector<double> defect_phase(2 * profile.defect_harmonics);
    for (auto& ph : defect_phase) ph = uniform(rng, 0.0, two_pi);

    for (std::size_t c = 0; c < 2; ++c) {
        auto& out = rec.channels[c].samples;
        const double quarter = c == 0 ? 0.0 : std::numbers::pi / 2;
        for (std::size_t h = 1; h <= profile.shaft_harmonics && amp.zone1 > 0.0; ++h) {
            const double a = amp.zone1 / static_cast<double>(h);
            const double w = two_pi * static_cast<double>(h) * f_shaft;
            const double ph = shaft_phase[h - 1] + quarter;
            for (std::size_t t = 0; t < n; ++t) out[t] += a * std::sin(w * static_cast<double>(t) * dt + ph);
        }
        for (std::size_t h = 1; h <= profile.defect_harmonics && amp.zone2 > 0.0; ++h) {
            const double a = amp.zone2 / static_cast<double>(h);
            const double w = two_pi * static_cast<double>(h) * f_defect;
            const double ph = defect_phase[c * profile.defect_harmonics + h - 1];
            for (std::size_t t = 0; t < n; ++t) out[t] += a * std::sin(w * static_cast<double>(t) * dt + ph);
        }
    }

    // Zone III: one decaying ring per defect period, shared timing on both axes.
    if (amp.zone3 > 0.0) {
        const double period = 1.0 / f_defect;
        const double ring_len = 14.0 * profile.ring_decay_s;  // exp(-14) ~ 1e-6
        const double w = two_pi * profile.resonance_hz;
        for (double start = uniform(rng, 0.0, period); start < static_cast<double>(n) * dt; start += period) {
            const double ax = jittered(amp.zone3, profile.impulse_jitter);
            const double ay = jittered(amp.zone3, profile.impulse_jitter);
            const auto first = static_cast<std::size_t>(std::ceil(start * sample_rate));
            const auto last = std::min(n, static_cast<std::size_t>(std::ceil((start + ring_len) * sample_rate)));
            for (std::size_t t = first; t < last; ++t) {
                const double tau = static_cast<double>(t) * dt - start;
                const double env = std::exp(-tau / profile.ring_decay_s);
                rec.channels[0].samples[t] += ax * env * std::sin(w * tau);
                rec.channels[1].samples[t] += ay * env * std::cos(w * tau);
            }
        }
    }

    if (amp.noise > 0.0) {
        std::normal_distribution<double> gauss(0.0, amp.noise);
        for (auto& ch : rec.channels)
            for (double& v : ch.samples) v += gauss(rng);
    }
    return rec;
}

BearingGeometry geometry_from_config(const KvConfig& cfg) {
    BearingGeometry g;
    g.balls = static_cast<int>(cfg.get_int("geometry.balls", g.balls));
    g.ball_diameter = cfg.get_double("geometry.ball_diameter", g.ball_diameter);
    g.pitch_diameter = cfg.get_double("geometry.pitch_diameter", g.pitch_diameter);
    g.contact_angle = cfg.get_double("geometry.contact_angle", g.contact_angle);
    g.shaft_hz = cfg.get_double("geometry.shaft_hz", g.shaft_hz);
    g.validate();
    return g;
}

SeverityProfile profile_from_config(const KvConfig& cfg) {
    SeverityProfile p = SeverityProfile::defaults();
    for (std::size_t c = 0; c < kSeverityClasses; ++c) {
        const std::string prefix = "profile." + std::string(kSeverityNames[c]) + ".";
        auto& z = p.classes[c];
        z.zone1 = cfg.get_double(prefix + "zone1", z.zone1);
        z.zone2 = cfg.get_double(prefix + "zone2", z.zone2);
        z.zone3 = cfg.get_double(prefix + "zone3", z.zone3);
        z.noise = cfg.get_double(prefix + "noise", z.noise);
    }
    p.shaft_harmonics = cfg.get_uint("profile.shaft_harmonics", p.shaft_harmonics);
    p.defect_harmonics = cfg.get_uint("profile.defect_harmonics", p.defect_harmonics);
    p.resonance_hz = cfg.get_double("profile.resonance_hz", p.resonance_hz);
    p.ring_decay_s = cfg.get_double("profile.ring_decay_s", p.ring_decay_s);
    p.recording_jitter = cfg.get_double("profile.recording_jitter", p.recording_jitter);
    p.impulse_jitter = cfg.get_double("profile.impulse_jitter", p.impulse_jitter);
    p.validate();
    return p;
}

}  // namespace sonn
