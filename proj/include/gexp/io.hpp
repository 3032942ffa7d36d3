#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gexp/characterization.hpp"
#include "gexp/distribution.hpp"
#include "gexp/error.hpp"
#include "gexp/gheat.hpp"
#include "gexp/sublinear.hpp"

namespace gexp::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers and CSV

/// Shortest-round-trip-safe text for a double: 17 significant digits,
/// '.' decimal separator regardless of locale.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

inline void write_grid_function_csv(std::ostream& os, const GridFunction& u) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(u.values().size());
    for (int i = 0; i < u.grid().n_points; ++i)
        rows.push_back({format_double(u.grid().node(i)), format_double(u.values()[i])});
    write_csv(os, {"x", "u"}, rows);
}

inline void write_report_csv(std::ostream& os, const InvarianceReport& rep) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
        rows.push_back({format_double(rep.lambdas[i]), format_double(rep.f_values[i]),
                        format_double(rep.deviations[i]), rep.worst_phi[i]});
    write_csv(os, {"lambda", "f_lambda", "deviation", "worst_phi"}, rows);
}

// ---------------------------------------------------------------------------
// JSON conversions

inline json to_json(const ScenarioSet& s) {
    json measures = json::array();
    for (const auto& m : s.measures()) {
        json atoms = json::array();
        for (const auto& a : m) atoms.push_back({a.value, a.weight});
        measures.push_back(std::move(atoms));
    }
    return {{"measures", std::move(measures)}};
}

/// {"measures": [[[atom, weight], ...], ...]}; weights are validated.
inline ScenarioSet scenario_from_json(const json& j) {
    if (!j.is_object() || !j.contains("measures") || !j["measures"].is_array())
        throw ValidationError("scenario: expected {\"measures\": [[[atom, weight], ...], ...]}");
    std::vector<DiscreteMeasure> measures;
    for (const auto& m : j["measures"]) {
        if (!m.is_array()) throw ValidationError("scenario: each measure must be an array of pairs");
        DiscreteMeasure dm;
        for (const auto& p : m) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ValidationError("scenario: each atom must be [value, weight]");
            dm.push_back({p[0].get<double>(), p[1].get<double>()});
        }
        measures.push_back(std::move(dm));
    }
    return ScenarioSet(std::move(measures));
}

inline json to_json(const MomentSummary& m) {
    return {{"mu_bar", m.mu_bar}, {"mu_low", m.mu_low}, {"var_bar", m.var_bar}, {"var_low", m.var_low}};
}

inline json to_json(const Grid& g) {
    return {{"x_min", g.x_min},         {"x_max", g.x_max},
            {"n_points", g.n_points},   {"t_final", g.t_final},
            {"cfl_fraction", g.cfl_fraction}};
}

inline json to_json(const InvarianceReport& r) {
    return {{"reference", r.reference},   {"lambdas", r.lambdas},     {"f_values", r.f_values},
            {"deviations", r.deviations}, {"worst_phi", r.worst_phi}, {"h_bar", r.h_bar},
            {"h_low", r.h_low},           {"skipped", r.skipped},     {"max_deviation", r.max_deviation}};
}

inline json to_json(const Theorem1Report& r) {
    return {{"scan", to_json(r.scan)},
            {"moments", to_json(r.moments)},
            {"means_vanish", r.means_vanish},
            {"threshold", r.threshold},
            {"result", r.pass ? "PASS" : "FAIL"}};
}

inline json to_json(const Theorem2Report& r) {
    return {{"a", r.a},
            {"b", r.b},
            {"scan", to_json(r.scan)},
            {"endpoint_distance", r.endpoint_distance},
            {"rescaling_lambdas", r.rescaling_lambdas},
            {"rescaling_deviations", r.rescaling_deviations},
            {"max_rescaling_deviation", r.max_rescaling_deviation},
            {"threshold", r.threshold},
            {"result", r.pass ? "PASS" : "FAIL"}};
}

/// {"type":"gnormal","sigma_low":..,"sigma_bar":..} or {"type":"scenario","measures":[...]}.
inline SublinearDistribution distribution_from_json(const json& j, const SolverSettings& solver = {}) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ValidationError("distribution: missing \"type\"");
    const auto type = j["type"].get<std::string>();
    if (type == "gnormal") {
        if (!j.contains("sigma_low") || !j.contains("sigma_bar"))
            throw ValidationError("distribution: gnormal needs sigma_low and sigma_bar");
        return SublinearDistribution(GNormal{
            GFunction1D(j["sigma_low"].get<double>(), j["sigma_bar"].get<double>()), 0.0, solver});
    }
    if (type == "scenario") return SublinearDistribution(scenario_from_json(j));
    throw ValidationError("distribution: unknown type \"" + type + "\"");
}

// ---------------------------------------------------------------------------
// TOML subset

/// Reader for the flat TOML used by configuration files: comments, bare or
/// quoted keys, [table] headers (dotted names nest), strings, numbers,
/// booleans, arrays (nested, multi-line) and inline tables. Produces JSON so
/// both config formats share one code path.
class TomlReader {
public:
    explicit TomlReader(std::string_view text) : s_(text) {}

    json parse() {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_ws_and_comments(true);
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_ws();
                const auto path = parse_key_path();
                skip_inline_ws();
                expect(']');
                table = &root;
                for (const auto& k : path) {
                    json& next = (*table)[k];
                    if (next.is_null()) next = json::object();
                    if (!next.is_object()) fail("table name collides with a value: " + k);
                    table = &next;
                }
            } else {
                const auto path = parse_key_path();
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                json value = parse_value();
                json* target = table;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    json& next = (*target)[path[i]];
                    if (next.is_null()) next = json::object();
                    target = &next;
                }
                if (target->contains(path.back())) fail("duplicate key: " + path.back());
                (*target)[path.back()] = std::move(value);
            }
            skip_inline_ws();
            if (!eof() && peek() == '#') skip_comment();
            if (!eof() && peek() != '\n' && peek() != '\r') fail("expected end of line");
        }
        return root;
    }

private:
    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
        throw ValidationError("toml line " + std::to_string(line) + ": " + what);
    }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_comment() {
        while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_ws_and_comments(bool newlines) {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || (newlines && (c == '\n' || c == '\r'))) {
                ++pos_;
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }

    std::vector<std::string> parse_key_path() {
        std::vector<std::string> path;
        while (true) {
            skip_inline_ws();
            if (eof()) fail("expected key");
            if (peek() == '"' || peek() == '\'') {
                path.push_back(peek() == '"' ? parse_string() : parse_literal_string());
            } else {
                const std::size_t start = pos_;
                while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                                  peek() == '-'))
                    ++pos_;
                if (start == pos_) fail("expected key");
                path.emplace_back(s_.substr(start, pos_ - start));
            }
            skip_inline_ws();
            if (!eof() && peek() == '.') {
                ++pos_;
                continue;
            }
            return path;
        }
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                const char e = s_[pos_++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
    }

    /// 'literal': no escapes.
    std::string parse_literal_string() {
        expect('\'');
        const std::size_t start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
        if (eof() || peek() != '\'') fail("unterminated string");
        std::string out(s_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    json parse_value() {
        if (eof()) fail("expected value");
        const char c = peek();
        if (c == '"') return parse_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') {
            ++pos_;
            json arr = json::array();
            while (true) {
                skip_ws_and_comments(true);
                if (eof()) fail("unterminated array");
                if (peek() == ']') {
                    ++pos_;
                    return arr;
                }
                arr.push_back(parse_value());
                skip_ws_and_comments(true);
                if (!eof() && peek() == ',') {
                    ++pos_;
                } else if (eof() || peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
        }
        if (c == '{') {
            ++pos_;
            json obj = json::object();
            skip_inline_ws();
            if (!eof() && peek() == '}') {
                ++pos_;
                return obj;
            }
            while (true) {
                const auto path = parse_key_path();
                if (path.size() != 1) fail("dotted keys are not supported in inline tables");
                skip_inline_ws();
                expect('=');
                skip_inline_ws();
                obj[path.front()] = parse_value();
                skip_inline_ws();
                if (!eof() && peek() == ',') {
                    ++pos_;
                    skip_inline_ws();
                    continue;
                }
                expect('}');
                return obj;
            }
        }
        const std::size_t start = pos_;
        while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' && peek() != '#' &&
               peek() != '\n' && peek() != '\r' && peek() != ' ' && peek() != '\t')
            ++pos_;
        std::string tok(s_.substr(start, pos_ - start));
        if (tok == "true") return true;
        if (tok == "false") return false;
        std::erase(tok, '_');
        if (tok.empty()) fail("expected value");
        const bool is_int = tok.find_first_of(".eEin") == std::string::npos;
        if (is_int) {
            long long v = 0;
            const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
            auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
            if (ec == std::errc() && p == tok.data() + tok.size()) return v;
        } else {
            double v = 0.0;
            const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
            auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
            if (ec == std::errc() && p == tok.data() + tok.size()) return v;
        }
        fail("cannot parse value '" + tok + "'");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline json parse_toml(std::string_view text) { return TomlReader(text).parse(); }

/// Loads a config file as JSON. Files ending in .json are read as JSON;
/// anything else as TOML, falling back to JSON if the text starts with '{'.
inline json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const bool json_ext = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    const auto first = text.find_first_not_of(" \t\r\n");
    try {
        if (json_ext || (first != std::string::npos && text[first] == '{')) return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    return parse_toml(text);
}

}  // namespace gexp::io
