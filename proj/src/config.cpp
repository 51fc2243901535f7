#include "tclevy/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tclevy/common.hpp"

namespace tclevy {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (cfg.kv_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "' (first at line " +
                              std::to_string(cfg.lines_[key]) + ")");
        cfg.kv_[key] = value;
        cfg.lines_[key] = lineno;
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

const std::string& Config::get(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end())
        throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(where(key) + ": field '" + key +
                          "' is not a number: '" + v + "'");
    return d;
}

double Config::get_double_or(const std::string& key, double dflt) const {
    return has(key) ? get_double(key) : dflt;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(where(key) + ": field '" + key +
                          "' is not a nonnegative integer: '" + v + "'");
    return static_cast<std::uint64_t>(u);
}

std::uint64_t Config::get_u64_or(const std::string& key, std::uint64_t dflt) const {
    return has(key) ? get_u64(key) : dflt;
}

std::vector<double> Config::get_list(const std::string& key) const {
    const std::string& v = get(key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t comma = v.find(',', pos);
        std::string item = trim(comma == std::string::npos ? v.substr(pos)
                                                           : v.substr(pos, comma - pos));
        if (item.empty())
            throw ConfigError(where(key) + ": field '" + key +
                              "' has an empty list entry");
        char* end = nullptr;
        double d = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError(where(key) + ": field '" + key +
                              "' has a non-numeric entry: '" + item + "'");
        out.push_back(d);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value) {
    kv_[key] = value;
    lines_.erase(key);
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::string Config::where(const std::string& key) const {
    auto it = lines_.find(key);
    if (it == lines_.end()) return origin_;
    return origin_ + ":" + std::to_string(it->second);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace tclevy
