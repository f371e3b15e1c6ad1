#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace sonn {

/// Plain `key = value` file. `#` starts a comment; blank lines are ignored.
/// Later assignments override earlier ones.
class KvConfig {
public:
    static KvConfig parse(std::istream& in);
    static KvConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;

    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace sonn
