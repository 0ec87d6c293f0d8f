#include "ampguard/kvfile.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "ampguard/csv.hpp"

namespace ampguard {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}
void KeyValueFile::set(const std::string& key, double value) {
    entries_[key] = format_double(value);
}
void KeyValueFile::set(const std::string& key, long long value) {
    entries_[key] = std::to_string(value);
}

bool KeyValueFile::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

const std::string& KeyValueFile::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw std::runtime_error("key-value file: missing key '" + key + "'");
    return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
    const std::string& s = get(key);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str())
        throw std::runtime_error("key-value file: key '" + key + "' not numeric");
    return v;
}

long long KeyValueFile::get_int(const std::string& key) const {
    return static_cast<long long>(get_double(key));
}

std::string KeyValueFile::serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " " << v << "\n";
    return out.str();
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile f;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto sp = line.find(' ');
        if (sp == std::string::npos)
            throw std::runtime_error("key-value file: malformed line '" + line + "'");
        std::string val = line.substr(sp + 1);
        if (!val.empty() && val.back() == '\r') val.pop_back();
        f.entries_[line.substr(0, sp)] = val;
    }
    return f;
}

void KeyValueFile::save(const std::string& path) const {
    write_file_atomic(path, serialize());
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    return parse(read_file(path));
}

}  // namespace ampguard
