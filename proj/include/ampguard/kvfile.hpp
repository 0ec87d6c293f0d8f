#pragma once

#include <map>
#include <string>

namespace ampguard {

/// Flat key-value artifact files: one "key value" pair per line, '#' comments.
/// Keys are unique; values stored as text, numeric accessors parse on demand.
class KeyValueFile {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;  // throws if absent
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

    std::string serialize() const;
    static KeyValueFile parse(const std::string& text);

    void save(const std::string& path) const;
    static KeyValueFile load(const std::string& path);

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

/// Deterministic text for a double: round-trippable, no locale surprises.
std::string format_double(double v);

}  // namespace ampguard
