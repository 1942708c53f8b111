#ifndef ACFS_CONFIG_HPP
#define ACFS_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

namespace acfs {

// Flat "dotted.key = value" config file: one assignment per line,
// '#' starts a comment, blank lines ignored.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_file(const std::string& path);
    static KeyValueConfig from_string(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split_csv(const std::string& s);

} // namespace acfs

#endif
