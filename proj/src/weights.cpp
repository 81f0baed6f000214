#include "pluralis/weights.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "pluralis/error.hpp"

namespace pluralis {

WeightVector::WeightVector(Eigen::VectorXd weights) : w_(std::move(weights)) {
    if (w_.size() == 0) throw InvalidArgument("weight vector is empty");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] < 0.0)
            throw InvalidArgument("weight " + std::to_string(i) + " is negative or not finite");
    }
    if (std::abs(w_.sum() - 1.0) > kSimplexTolerance)
        throw InvalidArgument("weights must sum to 1 (got " + std::to_string(w_.sum()) + ")");
}

WeightVector WeightVector::normalized(const Eigen::VectorXd& weights) {
    const double total = weights.sum();
    if (!(total > 0.0) || (weights.array() < 0.0).any())
        throw InvalidArgument("weights must be nonnegative with a positive sum");
    return WeightVector(weights / total);
}

std::uint64_t simplex_grid_size(std::size_t resolution, std::size_t d) {
    if (d == 0) return 0;
    // C(resolution + d - 1, d - 1), built incrementally so each step stays integral
    const std::uint64_t n = resolution + d - 1;
    const std::uint64_t k = d - 1;
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t factor = n - k + i;
        if (result > std::numeric_limits<std::uint64_t>::max() / factor) return std::numeric_limits<std::uint64_t>::max();
        result = result * factor / i;
    }
    return result;
}

std::vector<WeightVector> simplex_grid(std::size_t resolution, std::size_t d) {
    if (resolution < 1) throw InvalidArgument("simplex grid resolution must be at least 1");
    if (d < 1) throw InvalidArgument("simplex grid needs at least one objective");
    const std::uint64_t size = simplex_grid_size(resolution, d);
    if (size > kSimplexGridGuard)
        throw GuardExceeded("simplex grid with resolution " + std::to_string(resolution) + " over " +
                            std::to_string(d) + " objectives has " +
                            (size == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^64")
                                                                               : std::to_string(size)) +
                            " points (guard: 100000)");

    std::vector<WeightVector> grid;
    grid.reserve(size);
    std::vector<std::size_t> k(d, 0);
    const auto r = static_cast<double>(resolution);
    // positions 0..d-2 take ascending values; the last takes the remainder
    const auto fill = [&](auto& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == d) {
            k[pos] = remaining;
            Eigen::VectorXd w(static_cast<Eigen::Index>(d));
            for (std::size_t i = 0; i < d; ++i) w[static_cast<Eigen::Index>(i)] = static_cast<double>(k[i]) / r;
            grid.emplace_back(std::move(w));
            return;
        }
        for (std::size_t v = 0; v <= remaining; ++v) {
            k[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    fill(fill, 0, resolution);
    return grid;
}

}  // namespace pluralis
