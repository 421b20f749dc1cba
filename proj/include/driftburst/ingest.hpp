#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftburst/detector.hpp"
#include "driftburst/simulator.hpp"

namespace driftburst {

// One raw tick: either a quote (bid and ask), a trade, or both.
struct TickRecord {
    std::int64_t ts_ms = 0;
    std::optional<double> bid;
    std::optional<double> ask;
    std::optional<double> trade_px;
    std::optional<double> trade_sz;

    bool operator==(const TickRecord&) const = default;
};

struct LoadedTicks {
    std::vector<TickRecord> records;   // timestamp-sorted, stable on ties
    std::size_t malformed_rows = 0;
    std::size_t total_rows = 0;
};

// CSV with header `ts_ms,bid,ask,trade_px,trade_sz`; absent values are empty
// fields. Prices serialize with 17 significant digits, so save/load
// round-trips bit-exactly. Loading aborts when more than 0.1% of the data
// rows are malformed.
LoadedTicks load_ticks(const std::string& path);
LoadedTicks parse_ticks(const std::string& csv);
void save_ticks(const std::string& path, const std::vector<TickRecord>& records);
std::string ticks_to_csv(const std::vector<TickRecord>& records);

// Log mid-quote series: mid = (bid + ask) / 2 over records carrying both
// sides, retained only when the mid changes. Times are ts_ms / 1000.
TickSeries build_midquote(const std::vector<TickRecord>& records);

// Simulated session rendered as quote ticks (bid = ask = exp(level)).
std::vector<TickRecord> day_to_ticks(const DayPath& day);

}  // namespace driftburst
