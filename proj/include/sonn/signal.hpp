#pragma once

// Vibration recordings, framing and per-frame normalization.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sonn {

inline constexpr double kImsSampleRate = 20480.0;
inline constexpr std::size_t kDefaultFrameLength = 1000;
inline constexpr std::size_t kFrameChannels = 2;

enum class Severity : int { Healthy = 0, EarlyFault = 1, ModerateFault = 2, SevereFault = 3 };

inline constexpr std::size_t kSeverityClasses = 4;
inline constexpr std::array<std::string_view, kSeverityClasses> kSeverityNames{"healthy", "early", "moderate",
                                                                               "severe"};

/// Parses "healthy", "early", "moderate" or "severe".
Severity parse_severity(std::string_view name);

struct Channel {
    std::string name;
    std::vector<double> samples;
};

struct RawRecording {
    double sample_rate = kImsSampleRate;
    std::vector<Channel> channels;
    std::string source_id;

    std::size_t length() const noexcept { return channels.empty() ? 0 : channels.front().samples.size(); }
    /// Throws ArgumentError unless sample_rate > 0 and all channels share a length >= 1.
    void validate() const;
};

/// Two channels stored channel-major: samples[c * length + t].
struct Frame {
    std::size_t length = 0;
    std::vector<double> samples;
    std::optional<int> label;
    bool normalized = false;

    std::span<double> channel(std::size_t c) { return {samples.data() + c * length, length}; }
    std::span<const double> channel(std::size_t c) const { return {samples.data() + c * length, length}; }
};

struct FrameOrigin {
    std::string source_id;
    std::size_t frame_index = 0;
};

struct Dataset {
    std::vector<Frame> frames;
    std::vector<std::string> class_names{kSeverityNames.begin(), kSeverityNames.end()};
    std::vector<FrameOrigin> provenance;

    std::size_t size() const noexcept { return frames.size(); }
    std::vector<int> labels() const;
    /// Every frame normalized, labeled, and labels within the class set.
    void validate() const;
};

using ChannelPair = std::pair<std::size_t, std::size_t>;

/// IMS dataset-1 text: whitespace separated reals, one row per sample instant.
RawRecording ingest_ims(std::string_view text, ChannelPair channels);

/// Comma separated variant of the same row layout, optionally with one header line.
RawRecording ingest_csv(std::string_view text, ChannelPair channels, bool skip_header = false,
                        double sample_rate = kImsSampleRate);

/// Reads a file, choosing the CSV parser when the first data line has a comma.
RawRecording read_recording(const std::filesystem::path& path, ChannelPair channels, bool skip_header = false);

/// Writes every channel as comma separated rows with round-trip precision.
void write_csv(const RawRecording& rec, std::ostream& out);

std::vector<Frame> make_frames(const RawRecording& rec, std::size_t frame_len = kDefaultFrameLength);

/// In-place z-score followed by max-abs scaling. A channel with no spread becomes zeros.
void normalize_channel(std::span<double> samples);

Frame normalize_frame(const Frame& frame);

}  // namespace sonn
