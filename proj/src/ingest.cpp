#include "driftburst/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace driftburst {

namespace {

constexpr const char* kHeader = "ts_ms,bid,ask,trade_px,trade_sz";

// Splits one CSV line into exactly 5 fields; returns false on field-count
// mismatch. No quoting: the schema is purely numeric.
bool split5(const std::string& line, std::string (&out)[5]) {
    std::size_t start = 0, field = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            if (field >= 5) return false;
            out[field++] = line.substr(start, i - start);
            start = i + 1;
        }
    }
    return field == 5;
}

bool parse_opt(const std::string& s, std::optional<double>& out) {
    if (s.empty()) {
        out.reset();
        return true;
    }
    const char* b = s.data();
    const char* e = b + s.size();
    double v;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || p != e || !std::isfinite(v)) return false;
    out = v;
    return true;
}

bool valid(const TickRecord& r) {
    bool has_quote = r.bid.has_value() && r.ask.has_value();
    bool has_trade = r.trade_px.has_value();
    if (!has_quote && !has_trade) return false;
    if (r.bid && *r.bid <= 0.0) return false;
    if (r.ask && *r.ask <= 0.0) return false;
    if (has_quote && *r.ask < *r.bid) return false;
    if (r.trade_px && *r.trade_px <= 0.0) return false;
    if (r.trade_sz && *r.trade_sz < 0.0) return false;
    return true;
}

void append_opt(std::string& out, const std::optional<double>& v) {
    out.push_back(',');
    if (v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", *v);
        out += buf;
    }
}

}  // namespace

LoadedTicks parse_ticks(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line)) return {};  // empty file: empty list
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw std::invalid_argument("load_ticks: expected header '" + std::string(kHeader) +
                                    "', got '" + line + "'");
    }
    LoadedTicks res;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++res.total_rows;
        std::string f[5];
        TickRecord r;
        bool ok = split5(line, f);
        if (ok) {
            const char* b = f[0].data();
            auto [p, ec] = std::from_chars(b, b + f[0].size(), r.ts_ms);
            ok = ec == std::errc{} && p == b + f[0].size();
        }
        ok = ok && parse_opt(f[1], r.bid) && parse_opt(f[2], r.ask) &&
             parse_opt(f[3], r.trade_px) && parse_opt(f[4], r.trade_sz) && valid(r);
        if (!ok) {
            ++res.malformed_rows;
            continue;
        }
        res.records.push_back(r);
    }
    if (res.total_rows > 0 &&
        static_cast<double>(res.malformed_rows) > 0.001 * static_cast<double>(res.total_rows)) {
        throw std::runtime_error("load_ticks: " + std::to_string(res.malformed_rows) + " of " +
                                 std::to_string(res.total_rows) + " rows malformed (> 0.1%)");
    }
    std::stable_sort(res.records.begin(), res.records.end(),
                     [](const TickRecord& a, const TickRecord& b) { return a.ts_ms < b.ts_ms; });
    return res;
}

LoadedTicks load_ticks(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("load_ticks: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_ticks(ss.str());
}

std::string ticks_to_csv(const std::vector<TickRecord>& records) {
    std::string out = kHeader;
    out.push_back('\n');
    for (const auto& r : records) {
        out += std::to_string(r.ts_ms);
        append_opt(out, r.bid);
        append_opt(out, r.ask);
        append_opt(out, r.trade_px);
        append_opt(out, r.trade_sz);
        out.push_back('\n');
    }
    return out;
}

void save_ticks(const std::string& path, const std::vector<TickRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("save_ticks: cannot open " + path);
    out << ticks_to_csv(records);
    if (!out) throw std::runtime_error("save_ticks: write failed for " + path);
}

TickSeries build_midquote(const std::vector<TickRecord>& records) {
    TickSeries s;
    double last_mid = 0.0;
    bool have_last = false;
    for (const auto& r : records) {
        if (!r.bid || !r.ask) continue;
        double mid = 0.5 * (*r.bid + *r.ask);
        if (have_last && mid == last_mid) continue;  // retain only changes
        double t = static_cast<double>(r.ts_ms) / 1000.0;
        if (!s.times.empty() && t == s.times.back()) {
            // Same-millisecond revision: the later quote wins so that
            // timestamps stay strictly increasing.
            s.log_prices.back() = std::log(mid);
        } else {
            s.times.push_back(t);
            s.log_prices.push_back(std::log(mid));
        }
        last_mid = mid;
        have_last = true;
    }
    if (s.times.empty()) throw std::runtime_error("build_midquote: no quotes in input");
    return s;
}

std::vector<TickRecord> day_to_ticks(const DayPath& day) {
    std::vector<TickRecord> out;
    out.reserve(day.times.size());
    for (std::size_t i = 0; i < day.times.size(); ++i) {
        TickRecord r;
        r.ts_ms = std::llround(day.times[i] * 1000.0);
        double px = std::exp(day.noisy[i]);
        r.bid = px;
        r.ask = px;
        out.push_back(r);
    }
    return out;
}

}  // namespace driftburst
