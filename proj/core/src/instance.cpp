#include "opbeam/instance.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace opbeam {

namespace {

std::string cell(int v, int w) {
    return "cost[" + std::to_string(v) + "][" + std::to_string(w) + "]";
}

}  // namespace

Instance Instance::create(const std::vector<std::vector<double>>& cost,
                          std::vector<double> prize,
                          double t_max,
                          NodeId start,
                          NodeId end,
                          std::optional<std::vector<Point>> coords) {
    const auto n = cost.size();
    if (n == 0) {
        throw InstanceError("instance must have at least one node");
    }
    if (prize.size() != n) {
        throw InstanceError("dimension mismatch: prize has " + std::to_string(prize.size()) +
                            " entries, cost matrix has " + std::to_string(n) + " rows");
    }
    if (coords && coords->size() != n) {
        throw InstanceError("dimension mismatch: coords has " + std::to_string(coords->size()) +
                            " entries, expected " + std::to_string(n));
    }
    const int size = static_cast<int>(n);
    if (start < 0 || start >= size) {
        throw InstanceError("start index " + std::to_string(start) + " out of range");
    }
    if (end < 0 || end >= size) {
        throw InstanceError("end index " + std::to_string(end) + " out of range");
    }
    if (!std::isfinite(t_max) || t_max < 0.0) {
        throw InstanceError("t_max must be a finite nonnegative number");
    }

    Instance inst;
    inst.n_ = size;
    inst.cost_.reserve(n * n);
    for (int v = 0; v < size; ++v) {
        if (cost[v].size() != n) {
            throw InstanceError("dimension mismatch: cost row " + std::to_string(v) + " has " +
                                std::to_string(cost[v].size()) + " entries, expected " +
                                std::to_string(n));
        }
        for (int w = 0; w < size; ++w) {
            const double c = cost[v][w];
            if (!std::isfinite(c)) {
                throw InstanceError(cell(v, w) + " is not finite");
            }
            if (c < 0.0) {
                throw InstanceError("negative cost entry " + cell(v, w));
            }
            if (v == w && c != 0.0) {
                throw InstanceError("nonzero diagonal " + cell(v, w));
            }
            inst.cost_.push_back(c);
        }
    }
    for (int v = 0; v < size; ++v) {
        if (!std::isfinite(prize[v]) || prize[v] < 0.0 || prize[v] > 1.0) {
            throw InstanceError("prize[" + std::to_string(v) + "] outside [0, 1]");
        }
    }
    prize[start] = 0.0;
    prize[end] = 0.0;
    inst.prize_ = std::move(prize);
    inst.t_max_ = t_max;
    inst.start_ = start;
    inst.end_ = end;
    inst.coords_ = std::move(coords);
    return inst;
}

std::vector<std::vector<double>> Instance::cost_rows() const {
    std::vector<std::vector<double>> rows(n_);
    for (int v = 0; v < n_; ++v) {
        rows[v].assign(cost_.begin() + static_cast<std::ptrdiff_t>(v) * n_,
                       cost_.begin() + static_cast<std::ptrdiff_t>(v + 1) * n_);
    }
    return rows;
}

double Instance::min_positive_cost() const {
    double best = std::numeric_limits<double>::infinity();
    for (double c : cost_) {
        if (c > 0.0 && c < best) {
            best = c;
        }
    }
    return std::isinf(best) ? 0.0 : best;
}

}  // namespace opbeam
