#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "opbeam/instance.hpp"

namespace opbeam {

/// Prize distribution used when generating random instances.
///  - Constant: every prized node has prize 1.
///  - Uniform:  k/100 with k drawn uniformly from {1..100}.
///  - Distance: (1 + floor(99 * d(start, v) / max_w d(start, w))) / 100.
enum class PrizeKind { Constant, Uniform, Distance };

std::string_view to_string(PrizeKind kind);
std::optional<PrizeKind> parse_prize_kind(std::string_view name);

/// Budget used for the standard benchmark sizes: 20 -> 2, 50 -> 3, 100 -> 4.
/// Returns nullopt for any other size.
std::optional<double> default_budget(int n);

/// Samples n points uniformly in the unit square, uses Euclidean distances
/// as costs and node 0 as both start and end. Deterministic in `seed`.
Instance generate_euclidean_instance(int n, PrizeKind kind, double t_max, std::uint64_t seed);

}  // namespace opbeam
