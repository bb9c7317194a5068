#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "opbeam/search.hpp"

namespace opbeam {

/// Solvers exposed by the command-line front end and the benchmark table.
enum class Method { Exact, Random, TsiliGreedy, TsiliBeam, DqnGreedy, DqnBeam, Cs };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);
bool needs_model(Method m);

/// Score functions available to the cost-level search.
///  - Prize:        prize(P)
///  - Tsili:        prize(P) + greedy Tsili completion from P
///  - LogProbTsili: accumulated log-probability under the Tsili policy
///  - Dqn:          prize(P) + max q of the subproblem rooted at last(P)
enum class ScorerKind { Prize, Tsili, LogProbTsili, Dqn };

std::string_view to_string(ScorerKind s);
std::optional<ScorerKind> parse_scorer(std::string_view name);

struct SolveOptions {
    std::size_t beam_size = 100;  ///< step-beam width for tsili-beam and dqn-beam
    std::size_t k = 20;           ///< cost-level beam capacity
    double tau = 0.05;            ///< cost-level interval width
    std::uint64_t seed = 0;       ///< random method only
    /// Scorer for cs; defaults to Dqn when a model is supplied, else Prize.
    std::optional<ScorerKind> scorer;
    const ActionValueModel* model = nullptr;
    ExactOptions exact;
};

/// Runs one method on one instance. Throws std::invalid_argument when a
/// model-based method or scorer has no model.
SearchResult solve(const Instance& inst, Method method, const SolveOptions& options);

}  // namespace opbeam
