#include "sonn/kv_config.hpp"

#include "sonn/errors.hpp"

#include <charconv>
#include <fstream>

namespace sonn {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw FormatError("config key '" + key + "': cannot parse '" + text + "' as a number");
    }
    return value;
}

}  // namespace

KvConfig KvConfig::parse(std::istream& in) {
    KvConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw FormatError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KvConfig KvConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    return parse(in);
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    return std::nullopt;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_number<double>(key, *v) : fallback;
}

std::int64_t KvConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto v = get(key);
    return v ? parse_number<std::int64_t>(key, *v) : fallback;
}

std::uint64_t KvConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

}  // namespace sonn
