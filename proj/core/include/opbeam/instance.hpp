#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace opbeam {

using NodeId = int;

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

/// Raised when instance data violates a structural invariant.
class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A general orienteering problem: dense (possibly asymmetric, non-metric)
/// travel costs, node prizes in [0, 1], a cost budget and two endpoints.
///
/// Immutable after construction; safe to share across threads.
class Instance {
public:
    /// Validates and builds an instance. Prizes of `start` and `end` are
    /// forced to zero so that a path never collects them.
    static Instance create(const std::vector<std::vector<double>>& cost,
                           std::vector<double> prize,
                           double t_max,
                           NodeId start,
                           NodeId end,
                           std::optional<std::vector<Point>> coords = std::nullopt);

    int size() const { return n_; }
    double cost(NodeId from, NodeId to) const { return cost_[static_cast<std::size_t>(from) * n_ + to]; }
    double prize(NodeId v) const { return prize_[v]; }
    double t_max() const { return t_max_; }
    NodeId start() const { return start_; }
    NodeId end() const { return end_; }

    const std::vector<double>& prizes() const { return prize_; }
    const std::optional<std::vector<Point>>& coords() const { return coords_; }

    std::vector<std::vector<double>> cost_rows() const;

    /// Smallest strictly positive entry of the cost matrix, or 0 if none.
    double min_positive_cost() const;

    bool operator==(const Instance&) const = default;

private:
    Instance() = default;

    int n_ = 0;
    std::vector<double> cost_;
    std::vector<double> prize_;
    double t_max_ = 0.0;
    NodeId start_ = 0;
    NodeId end_ = 0;
    std::optional<std::vector<Point>> coords_;
};

}  // namespace opbeam
