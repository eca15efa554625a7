#pragma once

#include <map>
#include <string>
#include <vector>

namespace hgf::cli {

// Flat `key = value` configuration with [section] headers, # / ; comments and
// blank lines. Every entry remembers its source line; typed getters consume
// entries, and finish() reports whatever was never consumed as an unknown key
// with its line number -- a silent typo must not corrupt an experiment.
//
// All getters take the qualified name "section.key" and throw ConfigError
// (prefixed "file:line:") on missing required keys, unparsable values, or
// out-of-range numbers.
class Config {
public:
    static Config parse(const std::string& text, const std::string& name);
    static Config load(const std::string& path);

    bool has(const std::string& key) const;

    std::string text(const std::string& key);                         // required
    std::string text(const std::string& key, const std::string& fallback);
    double number(const std::string& key, double fallback);
    int integer(const std::string& key, int fallback);
    bool flag(const std::string& key, bool fallback);                 // on/off/true/false/1/0

    // Throws if any entry was never consumed (unknown keys), listing each
    // offender with its line number.
    void finish() const;

    // Raw file text, for echoing into run manifests.
    const std::string& raw() const { return raw_; }
    const std::string& name() const { return name_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
    Entry* find(const std::string& key);

    std::map<std::string, Entry> entries_;
    std::string raw_;
    std::string name_;
};

} // namespace hgf::cli
