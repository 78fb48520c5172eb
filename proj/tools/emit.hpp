#pragma once

// Output writers. Floats always use 17 significant digits; non-finite values become null.

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "congruence_lab/core.hpp"

namespace cli {

using json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// Integers that fit in 64 bits stay numbers, larger ones become decimal strings.
inline json integer_json(congruence_lab::i128 v) {
    if (v >= INT64_MIN && v <= INT64_MAX) return json(static_cast<std::int64_t>(v));
    return json(congruence_lab::to_string(v));
}

inline json integer_json(congruence_lab::u128 v) {
    if (v <= static_cast<congruence_lab::u128>(UINT64_MAX)) return json(static_cast<std::uint64_t>(v));
    return json(congruence_lab::to_string(v));
}

inline json rational_json(const congruence_lab::Rational& r) {
    return json{{"num", integer_json(r.num())}, {"den", integer_json(r.den())}};
}

inline std::string scalar_text(const json& j) {
    if (j.is_number_float()) return format_double(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

inline void write_json(std::string& out, const json& j, int depth) {
    const std::string pad(2 * (depth + 1), ' '), close(2 * depth, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
            out += pad + json(it.key()).dump() + ": ";
            write_json(out, it.value(), depth + 1);
            out += i + 1 < j.size() ? ",\n" : "\n";
        }
        out += close + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool flat = true;
        for (const auto& v : j) flat = flat && v.is_primitive();
        if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                write_json(out, j[i], depth + 1);
                if (i + 1 < j.size()) out += ", ";
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            out += pad;
            write_json(out, j[i], depth + 1);
            out += i + 1 < j.size() ? ",\n" : "\n";
        }
        out += close + "]";
    } else if (j.is_number_float()) {
        out += format_double(j.get<double>());
    } else {
        out += j.dump();
    }
}

inline std::string to_json_text(const json& j) {
    std::string out;
    write_json(out, j, 0);
    out += "\n";
    return out;
}

// Nested keys flatten to dotted names.
inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array() && !j.empty() && !j.front().is_primitive()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < j.size(); ++i) s += (i ? " " : "") + scalar_text(j[i]);
        out.emplace_back(prefix, s);
    } else {
        out.emplace_back(prefix, scalar_text(j));
    }
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

// A top-level "rows" array becomes one CSV line per row; anything else is a single row.
inline std::string to_csv_text(const json& j) {
    std::vector<json> rows;
    if (j.is_object() && j.contains("rows") && j["rows"].is_array())
        for (const auto& r : j["rows"]) rows.push_back(r);
    else
        rows.push_back(j);
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::vector<std::pair<std::string, std::string>> cells;
        flatten(rows[r], "", cells);
        if (r == 0) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i].first);
            out += "\n";
        }
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_field(cells[i].second);
        out += "\n";
    }
    return out;
}

inline std::string to_plain_text(const json& j) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(j, "", cells);
    std::string out;
    for (const auto& [k, v] : cells) out += k + ": " + v + "\n";
    return out;
}

}  // namespace cli
