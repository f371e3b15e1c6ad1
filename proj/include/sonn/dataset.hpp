#pragma once

// Labeled frame datasets, either synthesized or read from a class-per-folder tree.

#include "sonn/signal.hpp"
#include "sonn/synthgen.hpp"

#include <cstdint>
#include <filesystem>

namespace sonn {

class KvConfig;

struct SyntheticDatasetSpec {
    BearingGeometry geometry;
    FaultKind kind = FaultKind::InnerRace;
    SeverityProfile profile = SeverityProfile::defaults();
    std::size_t recordings_per_class = 20;
    double duration_s = 1.0;
    double sample_rate = kImsSampleRate;
    std::size_t frame_len = kDefaultFrameLength;
    std::uint64_t seed = 1;
};

/// Keys: geometry.*, profile.*, synth.kind, synth.recordings_per_class,
/// synth.duration_s, synth.sample_rate, synth.seed, frame_len.
SyntheticDatasetSpec synthetic_spec_from_kv(const KvConfig& cfg);

/// Seed of recording `index` of class `cls`.
std::uint64_t synthetic_recording_seed(std::uint64_t seed, Severity cls, std::size_t index);

/// recordings_per_class recordings per class, each cut into normalized frames.
Dataset make_synthetic_dataset(const SyntheticDatasetSpec& spec);

/// Reads `<dir>/<class>/*` for each severity class name. Files are listed in
/// name order; `max_frames_per_class` of 0 keeps every frame.
Dataset load_dataset_dir(const std::filesystem::path& dir, ChannelPair channels, std::size_t frame_len,
                         bool skip_header = false, std::size_t max_frames_per_class = 0);

}  // namespace sonn
