#pragma once

// Bearing defect frequencies and a three-zone synthetic vibration model.
//
// Zone I holds shaft-speed harmonics, zone II the defect-frequency harmonics,
// zone III resonance rings excited once per defect period. Severity classes
// differ in which zones carry energy and how much.

#include "sonn/signal.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace sonn {

class KvConfig;

/// Outer race fixed, inner race turning with the shaft.
struct BearingGeometry {
    int balls = 16;
    double ball_diameter = 0.331;   ///< same length unit as pitch_diameter
    double pitch_diameter = 2.815;
    double contact_angle = 0.2648;  ///< radians
    double shaft_hz = 2000.0 / 60.0;

    void validate() const;
};

enum class FaultKind { InnerRace, RollingElement };

FaultKind parse_fault_kind(std::string_view name);  ///< "inner" or "rolling"
std::string_view fault_kind_name(FaultKind kind) noexcept;

double cage_frequency(const BearingGeometry& g);
double inner_race_defect_frequency(const BearingGeometry& g);
double ball_defect_frequency(const BearingGeometry& g);

/// Zone-II carrier and zone-III repetition rate for the given fault.
double defect_frequency(const BearingGeometry& g, FaultKind kind);

struct ZoneAmplitudes {
    double zone1 = 0.0;
    double zone2 = 0.0;
    double zone3 = 0.0;
    double noise = 0.0;
};

struct SeverityProfile {
    std::array<ZoneAmplitudes, kSeverityClasses> classes{};
    std::size_t shaft_harmonics = 3;
    std::size_t defect_harmonics = 5;
    double resonance_hz = 4000.0;
    double ring_decay_s = 0.0015;     ///< time constant of each resonance ring
    double recording_jitter = 0.0;    ///< relative per-recording amplitude spread, in [0, 1)
    double impulse_jitter = 0.0;      ///< relative per-impulse amplitude spread, in [0, 1)

    static SeverityProfile defaults();

    /// Non-negative amplitudes and sane shape parameters.
    void validate() const;
    /// Zone presence pattern: Healthy zone I only, Early adds III, Moderate and
    /// Severe carry all zones with Severe's II/III above Moderate's.
    void validate_severity_pattern() const;
};

/// Two channels (x, y) of `duration_s * sample_rate` samples. Deterministic in `seed`.
RawRecording synthesize(const BearingGeometry& g, FaultKind kind, Severity cls, const SeverityProfile& profile,
                        double duration_s, double sample_rate, std::uint64_t seed);

/// Reads `geometry.*` and `profile.*` keys, falling back to the defaults.
BearingGeometry geometry_from_config(const KvConfig& cfg);
SeverityProfile profile_from_config(const KvConfig& cfg);

}  // namespace sonn
