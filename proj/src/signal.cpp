#include "sonn/signal.hpp"

#include "sonn/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace sonn {
namespace {

bool is_separator(char ch, bool commas) {
    return ch == ' ' || ch == '\t' || ch == '\r' || (commas && ch == ',');
}

// Splits one line into numbers. Returns false on an unparsable token.
bool parse_row(std::string_view line, bool commas, std::vector<double>& out, std::string& bad_token) {
    out.clear();
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_separator(line[i], commas)) ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !is_separator(line[j], commas)) ++j;
        std::string_view token = line.substr(i, j - i);
        if (token.size() > 1 && token.front() == '+') token.remove_prefix(1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
            bad_token.assign(line.substr(i, j - i));
            return false;
        }
        out.push_back(value);
        i = j;
    }
    return true;
}

RawRecording ingest_table(std::string_view text, ChannelPair channels, bool commas, bool skip_header,
                          double sample_rate, const char* what) {
    if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
    std::vector<double> first;
    std::vector<double> second;
    std::vector<double> row;
    std::string bad;
    std::size_t columns = 0;
    std::size_t lineno = 0;
    std::size_t pos = 0;
    bool header_pending = skip_header;

    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        if (line.find_first_not_of(" \t\r,") == std::string_view::npos) continue;
        if (!parse_row(line, commas, row, bad)) {
            throw ParseError(lineno, "non-numeric token '" + bad + "'");
        }
        if (columns == 0) {
            columns = row.size();
            if (channels.first >= columns || channels.second >= columns) {
                throw ArgumentError("channel index out of range: file has " + std::to_string(columns) +
                                    " columns");
            }
        } else if (row.size() != columns) {
            throw FormatError(std::string(what) + ": ragged row " + std::to_string(lineno) + " has " +
                              std::to_string(row.size()) + " columns, expected " + std::to_string(columns));
        }
        first.push_back(row[channels.first]);
        second.push_back(row[channels.second]);
    }
    if (first.empty()) throw FormatError(std::string(what) + ": no data rows");

    RawRecording rec;
    rec.sample_rate = sample_rate;
    rec.channels.push_back({"col" + std::to_string(channels.first), std::move(first)});
    rec.channels.push_back({"col" + std::to_string(channels.second), std::move(second)});
    return rec;
}

}  // namespace

Severity parse_severity(std::string_view name) {
    for (std::size_t i = 0; i < kSeverityNames.size(); ++i) {
        if (kSeverityNames[i] == name) return static_cast<Severity>(i);
    }
    throw ArgumentError("unknown severity class '" + std::string(name) +
                        "' (expected healthy, early, moderate or severe)");
}

void RawRecording::validate() const {
    if (!(sample_rate > 0.0)) throw ArgumentError("sample rate must be positive");
    if (channels.empty()) throw ArgumentError("recording has no channels");
    const std::size_t n = channels.front().samples.size();
    if (n == 0) throw ArgumentError("recording channels are empty");
    for (const auto& ch : channels) {
        if (ch.samples.size() != n) throw ArgumentError("recording channels differ in length");
    }
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(f.label.value_or(-1));
    return out;
}

void Dataset::validate() const {
    const int n_classes = static_cast<int>(class_names.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        if (!f.normalized) throw ArgumentError("dataset frame " + std::to_string(i) + " is not normalized");
        if (!f.label || *f.label < 0 || *f.label >= n_classes) {
            throw ArgumentError("dataset frame " + std::to_string(i) + " has no valid label");
        }
    }
}

RawRecording ingest_ims(std::string_view text, ChannelPair channels) {
    return ingest_table(text, channels, false, false, kImsSampleRate, "IMS file");
}

RawRecording ingest_csv(std::string_view text, ChannelPair channels, bool skip_header, double sample_rate) {
    return ingest_table(text, channels, true, skip_header, sample_rate, "CSV file");
}

RawRecording read_recording(const std::filesystem::path& path, ChannelPair channels, bool skip_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open recording: " + path.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    // Sniff the first data line for commas.
    std::size_t pos = 0;
    if (skip_header) {
        const auto nl = text.find('\n');
        pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    const auto nl = text.find('\n', pos);
    const bool commas = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos).find(',') !=
                        std::string::npos;
    RawRecording rec = commas ? ingest_csv(text, channels, skip_header) : skip_header
                                    ? ingest_table(text, channels, false, true, kImsSampleRate, "IMS file")
                                    : ingest_ims(text, channels);
    rec.source_id = path.filename().string();
    return rec;
}

void write_csv(const RawRecording& rec, std::ostream& out) {
    rec.validate();
    const std::size_t n = rec.length();
    char buf[32];
    std::string line;
    for (std::size_t t = 0; t < n; ++t) {
        line.clear();
        for (std::size_t c = 0; c < rec.channels.size(); ++c) {
            if (c != 0) line.push_back(',');
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), rec.channels[c].samples[t]);
            line.append(buf, ptr);
        }
        line.push_back('\n');
        out << line;
    }
}

std::vector<Frame> make_frames(const RawRecording& rec, std::size_t frame_len) {
    if (frame_len == 0) throw ArgumentError("frame length must be at least 1");
    if (rec.channels.size() != kFrameChannels) {
        throw ArgumentError("framing needs exactly 2 channels, got " + std::to_string(rec.channels.size()));
    }
    rec.validate();
    const std::size_t count = rec.length() / frame_len;
    std::vector<Frame> frames(count);
    for (std::size_t j = 0; j < count; ++j) {
        Frame& f = frames[j];
        f.length = frame_len;
        f.samples.resize(kFrameChannels * frame_len);
        for (std::size_t c = 0; c < kFrameChannels; ++c) {
            const auto& src = rec.channels[c].samples;
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(j * frame_len), frame_len,
                        f.samples.begin() + static_cast<std::ptrdiff_t>(c * frame_len));
        }
    }
    return frames;
}

void normalize_channel(std::span<double> samples) {
    if (samples.empty()) return;
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    double peak = 0.0;
    for (double v : samples) {
        mean += v;
        peak = std::max(peak, std::abs(v));
    }
    mean /= n;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);

    // Spread at rounding level counts as constant.
    if (!(sd > 64.0 * DBL_EPSILON * peak) || sd == 0.0) {
        std::fill(samples.begin(), samples.end(), 0.0);
        return;
    }
    double zpeak = 0.0;
    for (double& v : samples) {
        v = (v - mean) / sd;
        zpeak = std::max(zpeak, std::abs(v));
    }
    for (double& v : samples) v /= zpeak;
}

Frame normalize_frame(const Frame& frame) {
    if (frame.samples.size() != kFrameChannels * frame.length) {
        throw ArgumentError("frame sample count does not match 2 x length");
    }
    Frame out = frame;
    for (std::size_t c = 0; c < kFrameChannels; ++c) normalize_channel(out.channel(c));
    out.normalized = true;
    return out;
}

}  // namespace sonn
