#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tclevy {

// Line-oriented key=value configuration with [section] headers. A key inside
// [speed] is addressed as "speed.x_proxy". Parsing keeps line numbers so
// validation errors can point at the offending line. Values set through
// set() (command line overrides) win over file entries and carry no line.
class Config {
  public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text,
                             const std::string& origin = "<config>");

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& dflt) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double dflt) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t dflt) const;
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    const std::map<std::string, std::string>& entries() const { return kv_; }

    // Sorted key=value lines; the manifest hashes this text.
    std::string canonical() const;

    // "origin:line" of a key, or just the origin for overrides.
    std::string where(const std::string& key) const;

  private:
    std::map<std::string, std::string> kv_;
    std::map<std::string, int> lines_;
    std::string origin_ = "<config>";
};

// FNV-1a 64-bit digest as 16 hex characters; used for config hashes.
std::string fnv1a_hex(const std::string& text);

} // namespace tclevy
