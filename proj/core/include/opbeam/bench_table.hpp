#pragma once

#include <span>
#include <string>
#include <vector>

namespace opbeam {

/// Aggregate result of one method over an instance set.
struct MethodTotals {
    std::string method;
    double mean_objective = 0.0;
    double seconds = 0.0;
};

struct BenchRow {
    std::string method;
    double obj = 0.0;
    double gap_pct = 0.0;  ///< (best - obj) / best * 100 against the best obj of the run
    double time_s = 0.0;
};

/// Computes gaps against the best mean objective. A best objective of 0
/// gives every method a gap of 0.
std::vector<BenchRow> make_bench_rows(std::span<const MethodTotals> totals);

/// RFC 4180 CSV (CRLF line breaks) with header method,obj,gap_pct,time_s.
std::string bench_csv(std::span<const BenchRow> rows);

/// Aligned text table for terminals.
std::string bench_pretty(std::span<const BenchRow> rows);

/// Quotes a CSV field when it contains a comma, quote or line break.
std::string csv_field(const std::string& s);

}  // namespace opbeam
