#pragma once

/* Deterministic report emission.  Every artifact the tool writes -- solution
 * CSVs, convergence documents, verification summaries -- goes through the
 * fixed-format helpers here, so identical configurations produce bit-identical
 * bytes.  Numbers destined for CSV use 17-significant-digit scientific
 * notation (enough to round-trip an IEEE double); JSON documents rely on the
 * serializer's shortest-round-trip doubles and alphabetically ordered keys,
 * which are equally reproducible. */

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "blowup/errors.hpp"
#include "blowup/trend.hpp"

namespace blowup {

/* ------------------------------------------------------------- hashing -- */

/* FNV-1a, 64 bit.  Stable, dependency-free content hash for configs. */
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

/* ---------------------------------------------------------- formatting -- */

/* Fixed scientific notation with 17 significant digits. */
inline std::string fmt_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string csv_row(const std::vector<double>& vals) {
    std::string out;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ',';
        out += fmt_sci(vals[i]);
    }
    out += '\n';
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot open '" + path + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw numerical_error("short write to '" + path + "'");
}

/* ------------------------------------------------------- check records -- */

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

inline nlohmann::json to_json(const TrendVerdict& v) {
    return {{"residual", v.residual},
            {"final_residual", v.final_residual},
            {"trailing_decreases", v.trailing_decreases},
            {"decreasing", v.decreasing},
            {"below_threshold", v.below_threshold},
            {"pass", v.pass}};
}

inline nlohmann::json to_json(const LimitSeries& s) {
    return {{"name", s.name},
            {"anchor", s.anchor},
            {"limit", s.limit},
            {"x", s.x},
            {"measured", s.measured},
            {"verdict", to_json(s.verdict)}};
}

/* One verification check: a named claim, the measured residual series that
 * support it, and a three-valued verdict. */
struct CheckRecord {
    std::string name;
    std::string anchor;           /* stable claim identifier */
    Verdict verdict = Verdict::inconclusive;
    double runtime_s = 0.0;
    std::string details;
    std::vector<LimitSeries> series;

    nlohmann::json to_json() const {
        nlohmann::json js = nlohmann::json::array();
        for (const auto& s : series) js.push_back(blowup::to_json(s));
        return {{"name", name},
                {"anchor", anchor},
                {"verdict", verdict_name(verdict)},
                {"runtime_s", runtime_s},
                {"details", details},
                {"residual_series", js}};
    }
};

struct VerificationReport {
    std::string config_hash;
    std::vector<CheckRecord> checks;

    int count(Verdict v) const {
        int n = 0;
        for (const auto& c : checks) n += c.verdict == v ? 1 : 0;
        return n;
    }
    bool all_pass() const { return count(Verdict::fail) + count(Verdict::inconclusive) == 0; }

    nlohmann::json to_json() const {
        nlohmann::json js = nlohmann::json::array();
        for (const auto& c : checks) js.push_back(c.to_json());
        return {{"config_hash", config_hash},
                {"summary",
                 {{"pass", count(Verdict::pass)},
                  {"fail", count(Verdict::fail)},
                  {"inconclusive", count(Verdict::inconclusive)}}},
                {"checks", js}};
    }

    std::string human_summary() const {
        std::string out;
        char line[256];
        for (const auto& c : checks) {
            std::snprintf(line, sizeof line, "[%-12s] %-42s %8.2fs  %s\n",
                          verdict_name(c.verdict), c.name.c_str(), c.runtime_s,
                          c.details.substr(0, 140).c_str());
            out += line;
        }
        std::snprintf(line, sizeof line, "total: %d pass, %d fail, %d inconclusive\n",
                      count(Verdict::pass), count(Verdict::fail),
                      count(Verdict::inconclusive));
        out += line;
        return out;
    }
};

} // namespace blowup
