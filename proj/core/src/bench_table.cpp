#include "opbeam/bench_table.hpp"

#include <algorithm>
#include <cstdio>

namespace opbeam {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::vector<BenchRow> make_bench_rows(std::span<const MethodTotals> totals) {
    double best = 0.0;
    for (const auto& t : totals) best = std::max(best, t.mean_objective);
    std::vector<BenchRow> rows;
    rows.reserve(totals.size());
    for (const auto& t : totals) {
        BenchRow r;
        r.method = t.method;
        r.obj = t.mean_objective;
        r.gap_pct = best > 0.0 ? std::max(0.0, (best - t.mean_objective) / best * 100.0) : 0.0;
        r.time_s = t.seconds;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::string out = "method,obj,gap_pct,time_s\r\n";
    for (const auto& r : rows) {
        out += csv_field(r.method) + "," + fixed(r.obj, 6) + "," + fixed(r.gap_pct, 4) + "," +
               fixed(r.time_s, 3) + "\r\n";
    }
    return out;
}

std::string bench_pretty(std::span<const BenchRow> rows) {
    std::size_t width = 6;
    for (const auto& r : rows) width = std::max(width, r.method.size());
    auto pad = [](std::string s, std::size_t w, bool left) {
        if (s.size() >= w) return s;
        return left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
    };
    std::string out = pad("Method", width, true) + "  " + pad("Obj.", 10, false) + "  " +
                      pad("Gap", 8, false) + "  " + pad("Time", 10, false) + "\n";
    for (const auto& r : rows) {
        out += pad(r.method, width, true) + "  " + pad(fixed(r.obj, 4), 10, false) + "  " +
               pad(fixed(r.gap_pct, 2) + "%", 8, false) + "  " + pad(fixed(r.time_s, 2) + "s", 10, false) +
               "\n";
    }
    return out;
}

}  // namespace opbeam
