#pragma once

#include "adjopt/core/error.hpp"
#include "adjopt/heat/signals.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace adjopt::app {

/// Malformed or inconsistent configuration; the message names the key or line.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

inline std::string trim(std::string_view s)
{
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline double parse_number(const std::string& key, const std::string& text)
{
    const auto t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw ConfigError("'" + key + "': expected a number, got '" + t + "'");
    return v;
}

/// Shortest text that parses back to the same double.
inline std::string shortest(double v)
{
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string generator_text(const heat::Generator& g)
{
    std::string s = g.name + "(";
    bool first = true;
    for (const auto& [k, v] : g.params) {
        s += (first ? "" : ", ") + k + "=" + shortest(v);
        first = false;
    }
    return s + ")";
}

/// `name(k=v, k2=v2)` or a bare `name`.
inline heat::Generator parse_generator(const std::string& key, const std::string& text)
{
    const auto t = trim(text);
    heat::Generator g;
    const auto open = t.find('(');
    if (open == std::string::npos) {
        g.name = t;
    } else {
        if (t.back() != ')') throw ConfigError("'" + key + "': missing ')' in generator '" + t + "'");
        g.name = trim(t.substr(0, open));
        std::stringstream args(t.substr(open + 1, t.size() - open - 2));
        std::string item;
        while (std::getline(args, item, ',')) {
            if (trim(item).empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("'" + key + "': generator argument '" + trim(item) + "' is not k=v");
            g.params[trim(item.substr(0, eq))] = parse_number(key, item.substr(eq + 1));
        }
    }
    if (g.name.empty()) throw ConfigError("'" + key + "': empty generator name");
    return g;
}

/// Flat `key = value` text with `#` comments. Keys carry dotted section
/// prefixes (`heat.nx`). Every key must be consumed, so typos are reported.
class Config {
public:
    static Config parse(const std::string& text)
    {
        Config c;
        std::istringstream in(text);
        std::string line;
        for (int lineno = 1; std::getline(in, line); ++lineno) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
            const auto key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            if (c.kv_.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            c.kv_[key] = trim(line.substr(eq + 1));
        }
        return c;
    }

    static Config load(const std::string& path)
    {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot read config file '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    const std::string& str(const std::string& key) const
    {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("missing required field '" + key + "'");
        used_.insert(key);
        return it->second;
    }
    std::string str(const std::string& key, const std::string& fallback) const
    {
        return has(key) ? str(key) : fallback;
    }

    double num(const std::string& key) const { return parse_number(key, str(key)); }
    double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

    std::size_t count(const std::string& key, std::size_t fallback) const
    {
        if (!has(key)) return fallback;
        const double v = num(key);
        if (v < 0.0 || v != double(std::size_t(v))) throw ConfigError("'" + key + "': expected a non-negative integer");
        return std::size_t(v);
    }

    bool flag(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = str(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw ConfigError("'" + key + "': expected true or false, got '" + v + "'");
    }

    heat::Generator generator(const std::string& key, const heat::Generator& fallback) const
    {
        return has(key) ? parse_generator(key, str(key)) : fallback;
    }

    /// Comma-separated list of raw items.
    std::vector<std::string> list(const std::string& key) const
    {
        std::vector<std::string> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(trim(item));
        return out;
    }

    void reject_unused() const
    {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) throw ConfigError("unknown field '" + k + "'");
    }

private:
    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
};

} // namespace adjopt::app
