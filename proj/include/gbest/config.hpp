#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gbest/error.hpp"

namespace gbest {

// Plain-text configuration: `key = value` lines grouped under `[section]`
// headers; `#` and `;` start comments; keys before any header live in the
// unnamed section. Values are kept as strings; list values are
// comma-separated. See docs/config.md for the full grammar.
class Config {
public:
    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        std::string section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto comment = line.find_first_of("#;");
            if (comment != std::string::npos) line.erase(comment);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw Error("config line " + std::to_string(line_no) + ": unterminated section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw Error("config line " + std::to_string(line_no) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw Error("config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[section][key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("config: cannot open '" + path + "'");
        return parse(in);
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = values_.find(section);
        return s != values_.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& section, const std::string& key) const {
        const auto s = values_.find(section);
        if (s == values_.end() || !s->second.count(key))
            throw Error("config: missing key '" + key + "' in section [" + section + "]");
        return s->second.at(key);
    }

    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return to_double(get(section, key), section, key);
    }

    long get_int(const std::string& section, const std::string& key) const {
        const double v = get_double(section, key);
        return static_cast<long>(v);
    }

    std::vector<std::string> get_list(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(get(section, key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : get_list(section, key)) out.push_back(to_double(s, section, key));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
        return s.substr(b, e - b);
    }

    static double to_double(const std::string& s, const std::string& section, const std::string& key) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error("config: value '" + s + "' for key '" + key + "' in section [" + section +
                        "] is not numeric");
        }
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace gbest
