#include "opbeam/methods.hpp"

#include <array>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "opbeam/heuristics.hpp"

namespace opbeam {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethods{{
    {Method::Exact, "exact"},
    {Method::Random, "random"},
    {Method::TsiliGreedy, "tsili-greedy"},
    {Method::TsiliBeam, "tsili-beam"},
    {Method::DqnGreedy, "dqn-greedy"},
    {Method::DqnBeam, "dqn-beam"},
    {Method::Cs, "cs"},
}};

constexpr std::array<std::pair<ScorerKind, std::string_view>, 4> kScorers{{
    {ScorerKind::Prize, "prize"},
    {ScorerKind::Tsili, "tsili"},
    {ScorerKind::LogProbTsili, "logprob-tsili"},
    {ScorerKind::Dqn, "dqn"},
}};

const ActionValueModel& require_model(const SolveOptions& options, std::string_view who) {
    if (options.model == nullptr) {
        throw std::invalid_argument(std::string(who) + " needs a trained checkpoint");
    }
    return *options.model;
}

}  // namespace

std::string_view to_string(Method m) {
    for (const auto& [value, name] : kMethods) {
        if (value == m) return name;
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
    for (const auto& [value, n] : kMethods) {
        if (n == name) return value;
    }
    return std::nullopt;
}

bool needs_model(Method m) { return m == Method::DqnGreedy || m == Method::DqnBeam; }

std::string_view to_string(ScorerKind s) {
    for (const auto& [value, name] : kScorers) {
        if (value == s) return name;
    }
    return "unknown";
}

std::optional<ScorerKind> parse_scorer(std::string_view name) {
    for (const auto& [value, n] : kScorers) {
        if (n == name) return value;
    }
    return std::nullopt;
}

SearchResult solve(const Instance& inst, Method method, const SolveOptions& options) {
    switch (method) {
    case Method::Exact:
        return exhaustive_exact(inst, options.exact);
    case Method::Random:
        return sampled_rollout(inst, RandomPolicy{}, options.seed);
    case Method::TsiliGreedy:
        return greedy_rollout(inst, TsiliScorePolicy{});
    case Method::TsiliBeam: {
        const TsiliProbabilityPolicy policy;
        return step_beam_search(inst, LogProbScore(policy), options.beam_size);
    }
    case Method::DqnGreedy:
        return greedy_rollout(inst, QValuePolicy(require_model(options, "dqn-greedy")));
    case Method::DqnBeam:
        return step_beam_search(inst, LearnedQScore(require_model(options, "dqn-beam")), options.beam_size);
    case Method::Cs: {
        const ScorerKind kind =
            options.scorer.value_or(options.model != nullptr ? ScorerKind::Dqn : ScorerKind::Prize);
        const TsiliProbabilityPolicy tsili_policy;
        std::unique_ptr<HeuristicScore> score;
        switch (kind) {
        case ScorerKind::Prize:
            score = std::make_unique<PrizeOnlyScore>();
            break;
        case ScorerKind::Tsili:
            score = std::make_unique<TsiliRolloutScore>();
            break;
        case ScorerKind::LogProbTsili:
            score = std::make_unique<LogProbScore>(tsili_policy);
            break;
        case ScorerKind::Dqn:
            score = std::make_unique<LearnedQScore>(require_model(options, "the dqn scorer"));
            break;
        }
        return cost_level_beam_search(inst, *score, options.k, options.tau);
    }
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace opbeam
