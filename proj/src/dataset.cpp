#include "sonn/dataset.hpp"

#include "sonn/errors.hpp"
#include "sonn/kv_config.hpp"
#include "sonn/rng.hpp"

#include <algorithm>

namespace sonn {
namespace {

void append_recording(Dataset& ds, const RawRecording& rec, int label, std::size_t frame_len, std::size_t limit) {
    auto frames = make_frames(rec, frame_len);
    for (std::size_t j = 0; j < frames.size(); ++j) {
        if (limit != 0 && j >= limit) break;
        Frame f = normalize_frame(frames[j]);
        f.label = label;
        ds.frames.push_back(std::move(f));
        ds.provenance.push_back({rec.source_id, j});
    }
}

}  // namespace

SyntheticDatasetSpec synthetic_spec_from_kv(const KvConfig& cfg) {
    SyntheticDatasetSpec spec;
    spec.geometry = geometry_from_config(cfg);
    spec.profile = profile_from_config(cfg);
    spec.kind = parse_fault_kind(cfg.get_string("synth.kind", "inner"));
    spec.recordings_per_class = cfg.get_uint("synth.recordings_per_class", spec.recordings_per_class);
    spec.duration_s = cfg.get_double("synth.duration_s", spec.duration_s);
    spec.sample_rate = cfg.get_double("synth.sample_rate", spec.sample_rate);
    spec.seed = cfg.get_uint("synth.seed", spec.seed);
    spec.frame_len = cfg.get_uint("frame_len", spec.frame_len);
    return spec;
}

std::uint64_t synthetic_recording_seed(std::uint64_t seed, Severity cls, std::size_t index) {
    return derive_seed({seed, static_cast<std::uint64_t>(cls), index, 0x5EEDull});
}

Dataset make_synthetic_dataset(const SyntheticDatasetSpec& spec) {
    spec.profile.validate_severity_pattern();
    Dataset ds;
    for (std::size_t c = 0; c < kSeverityClasses; ++c) {
        const auto cls = static_cast<Severity>(c);
        for (std::size_t r = 0; r < spec.recordings_per_class; ++r) {
            const RawRecording rec = synthesize(spec.geometry, spec.kind, cls, spec.profile, spec.duration_s,
                                                spec.sample_rate, synthetic_recording_seed(spec.seed, cls, r));
            append_recording(ds, rec, static_cast<int>(c), spec.frame_len, 0);
        }
    }
    return ds;
}

Dataset load_dataset_dir(const std::filesystem::path& dir, ChannelPair channels, std::size_t frame_len,
                         bool skip_header, std::size_t max_frames_per_class) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("data directory not found: " + dir.string());
    Dataset ds;
    for (std::size_t c = 0; c < kSeverityClasses; ++c) {
        const fs::path class_dir = dir / std::string(kSeverityNames[c]);
        if (!fs::is_directory(class_dir)) throw DataError("missing class directory: " + class_dir.string());
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(class_dir))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        std::size_t taken = 0;
        for (const auto& file : files) {
            if (max_frames_per_class != 0 && taken >= max_frames_per_class) break;
            const RawRecording rec = read_recording(file, channels, skip_header);
            const std::size_t before = ds.frames.size();
            append_recording(ds, rec, static_cast<int>(c), frame_len,
                             max_frames_per_class == 0 ? 0 : max_frames_per_class - taken);
            taken += ds.frames.size() - before;
        }
        if (taken == 0) throw DataError("no frames found for class " + std::string(kSeverityNames[c]));
    }
    return ds;
}

}  // namespace sonn
