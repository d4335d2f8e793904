#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace csiloc {

/// Sectioned key = value configuration text. Keys may repeat within a
/// section; lookup helpers return the first occurrence, `values` all of them.
class IniDoc {
public:
    static IniDoc parse(const std::string &text);
    static IniDoc read_file(const std::string &path);

    bool has(const std::string &section, const std::string &key) const;
    std::optional<std::string> value(const std::string &section,
                                     const std::string &key) const;
    std::vector<std::string> values(const std::string &section,
                                    const std::string &key) const;

    double get_double(const std::string &section, const std::string &key,
                      double fallback) const;
    int get_int(const std::string &section, const std::string &key,
                int fallback) const;
    bool get_bool(const std::string &section, const std::string &key,
                  bool fallback) const;
    std::string get_string(const std::string &section, const std::string &key,
                           const std::string &fallback) const;
    /// Whitespace-separated list of doubles.
    std::vector<double> get_doubles(const std::string &section,
                                    const std::string &key) const;

    const std::vector<std::string> &sections() const { return section_order_; }

private:
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> data_;
    std::vector<std::string> section_order_;
};

std::vector<std::string> split_ws(const std::string &s);

} // namespace csiloc
