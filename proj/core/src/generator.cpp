#include "opbeam/generator.hpp"

#include <cmath>
#include <vector>

#include "opbeam/random.hpp"

namespace opbeam {

std::string_view to_string(PrizeKind kind) {
    switch (kind) {
    case PrizeKind::Constant:
        return "constant";
    case PrizeKind::Uniform:
        return "uniform";
    case PrizeKind::Distance:
        return "distance";
    }
    return "unknown";
}

std::optional<PrizeKind> parse_prize_kind(std::string_view name) {
    if (name == "constant") return PrizeKind::Constant;
    if (name == "uniform") return PrizeKind::Uniform;
    if (name == "distance") return PrizeKind::Distance;
    return std::nullopt;
}

std::optional<double> default_budget(int n) {
    switch (n) {
    case 20:
        return 2.0;
    case 50:
        return 3.0;
    case 100:
        return 4.0;
    default:
        return std::nullopt;
    }
}

Instance generate_euclidean_instance(int n, PrizeKind kind, double t_max, std::uint64_t seed) {
    if (n < 2) {
        throw InstanceError("generated instances need at least 2 nodes");
    }
    Rng rng(seed);
    std::vector<Point> coords(n);
    for (auto& p : coords) {
        p.x = uniform01(rng);
        p.y = uniform01(rng);
    }

    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int v = 0; v < n; ++v) {
        for (int w = 0; w < n; ++w) {
            if (v != w) {
                const double dx = coords[v].x - coords[w].x;
                const double dy = coords[v].y - coords[w].y;
                cost[v][w] = std::sqrt(dx * dx + dy * dy);
            }
        }
    }

    const NodeId depot = 0;
    std::vector<double> prize(n, 0.0);
    switch (kind) {
    case PrizeKind::Constant:
        for (int v = 0; v < n; ++v) prize[v] = 1.0;
        break;
    case PrizeKind::Uniform:
        for (int v = 0; v < n; ++v) {
            prize[v] = static_cast<double>(1 + uniform_index(rng, 100)) / 100.0;
        }
        break;
    case PrizeKind::Distance: {
        double far = 0.0;
        for (int w = 0; w < n; ++w) far = std::max(far, cost[depot][w]);
        for (int v = 0; v < n; ++v) {
            const double ratio = far > 0.0 ? cost[depot][v] / far : 0.0;
            prize[v] = (1.0 + std::floor(99.0 * ratio)) / 100.0;
        }
        break;
    }
    }
    return Instance::create(cost, std::move(prize), t_max, depot, depot, std::move(coords));
}

}  // namespace opbeam
