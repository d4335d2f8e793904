#include "csiloc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "csiloc/errors.hpp"

namespace csiloc {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<std::string> split_ws(const std::string &s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

IniDoc IniDoc::parse(const std::string &text) {
    IniDoc doc;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw LoadError("config line " + std::to_string(lineno) +
                                ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!doc.data_.count(section))
                doc.section_order_.push_back(section);
            doc.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw LoadError("config line " + std::to_string(lineno) +
                            ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw LoadError("config line " + std::to_string(lineno) + ": empty key");
        if (!doc.data_.count(section))
            doc.section_order_.push_back(section);
        doc.data_[section].emplace_back(key, val);
    }
    return doc;
}

IniDoc IniDoc::read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool IniDoc::has(const std::string &section, const std::string &key) const {
    return value(section, key).has_value();
}

std::optional<std::string> IniDoc::value(const std::string &section,
                                         const std::string &key) const {
    const auto it = data_.find(section);
    if (it == data_.end())
        return std::nullopt;
    for (const auto &[k, v] : it->second)
        if (k == key)
            return v;
    return std::nullopt;
}

std::vector<std::string> IniDoc::values(const std::string &section,
                                        const std::string &key) const {
    std::vector<std::string> out;
    const auto it = data_.find(section);
    if (it == data_.end())
        return out;
    for (const auto &[k, v] : it->second)
        if (k == key)
            out.push_back(v);
    return out;
}

double IniDoc::get_double(const std::string &section, const std::string &key,
                          double fallback) const {
    const auto v = value(section, key);
    if (!v)
        return fallback;
    try {
        std::size_t pos = 0;
        const double d = std::stod(*v, &pos);
        if (pos != v->size())
            throw std::invalid_argument("");
        return d;
    } catch (const std::exception &) {
        throw LoadError("config [" + section + "] " + key +
                        ": not a number: " + *v);
    }
}

int IniDoc::get_int(const std::string &section, const std::string &key,
                    int fallback) const {
    const auto v = value(section, key);
    if (!v)
        return fallback;
    try {
        std::size_t pos = 0;
        const int i = std::stoi(*v, &pos);
        if (pos != v->size())
            throw std::invalid_argument("");
        return i;
    } catch (const std::exception &) {
        throw LoadError("config [" + section + "] " + key +
                        ": not an integer: " + *v);
    }
}

bool IniDoc::get_bool(const std::string &section, const std::string &key,
                      bool fallback) const {
    const auto v = value(section, key);
    if (!v)
        return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
        return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
        return false;
    throw LoadError("config [" + section + "] " + key + ": not a boolean: " + *v);
}

std::string IniDoc::get_string(const std::string &section, const std::string &key,
                               const std::string &fallback) const {
    return value(section, key).value_or(fallback);
}

std::vector<double> IniDoc::get_doubles(const std::string &section,
                                        const std::string &key) const {
    std::vector<double> out;
    const auto v = value(section, key);
    if (!v)
        return out;
    for (const std::string &tok : split_ws(*v)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception &) {
            throw LoadError("config [" + section + "] " + key +
                            ": not a number: " + tok);
        }
    }
    return out;
}

} // namespace csiloc
