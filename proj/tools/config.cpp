#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hgf/errors.hpp"

namespace hgf::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.raw_ = text;
    cfg.name_ = name;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError(name + ":" + std::to_string(lineno) +
                              ": key outside of any [section]");
        std::string full = section + "." + key;
        auto [it, fresh] = cfg.entries_.emplace(full, Entry{value, lineno, false});
        if (!fresh)
            throw ConfigError(name + ":" + std::to_string(lineno) + ": duplicate key " + full +
                              " (first at line " + std::to_string(it->second.line) + ")");
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str(), path);
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

Config::Entry* Config::find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

void Config::fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    std::string at = it == entries_.end() ? name_ : name_ + ":" + std::to_string(it->second.line);
    throw ConfigError(at + ": " + what + " for key " + key);
}

std::string Config::text(const std::string& key) {
    Entry* e = find(key);
    if (!e) throw ConfigError(name_ + ": missing required key " + key);
    return e->value;
}

std::string Config::text(const std::string& key, const std::string& fallback) {
    Entry* e = find(key);
    return e ? e->value : fallback;
}

double Config::number(const std::string& key, double fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    double x = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0') fail(key, "expected a number, got '" + e->value + "'");
    return x;
}

int Config::integer(const std::string& key, int fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    char* end = nullptr;
    long x = std::strtol(e->value.c_str(), &end, 10);
    if (end == e->value.c_str() || *end != '\0')
        fail(key, "expected an integer, got '" + e->value + "'");
    return static_cast<int>(x);
}

bool Config::flag(const std::string& key, bool fallback) {
    Entry* e = find(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(key, "expected on/off, got '" + e->value + "'");
}

void Config::finish() const {
    std::string bad;
    for (const auto& [key, e] : entries_)
        if (!e.used) bad += "\n  " + name_ + ":" + std::to_string(e.line) + ": unknown key " + key;
    if (!bad.empty()) throw ConfigError("unknown configuration keys:" + bad);
}

} // namespace hgf::cli
