#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pluralis {

inline constexpr std::uint64_t kSimplexGridGuard = 100'000;
inline constexpr double kSimplexTolerance = 1e-9;

/// Point on the probability simplex: nonnegative components summing to 1 (within 1e-9).
class WeightVector {
public:
    /// Throws InvalidArgument when `weights` is not on the simplex.
    explicit WeightVector(Eigen::VectorXd weights);

    /// Projects nonnegative weights onto the simplex by dividing by their sum.
    static WeightVector normalized(const Eigen::VectorXd& weights);

    const Eigen::VectorXd& values() const { return w_; }
    std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
    double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }

    friend bool operator==(const WeightVector& a, const WeightVector& b) {
        return a.w_.size() == b.w_.size() && a.w_ == b.w_;
    }

private:
    Eigen::VectorXd w_;
};

/// Number of points of the uniform simplex grid (compositions of `resolution`
/// into `d` parts), saturating at UINT64_MAX.
std::uint64_t simplex_grid_size(std::size_t resolution, std::size_t d);

/// All weight vectors k / resolution with integer k summing to `resolution`,
/// in ascending lexicographic order of k. Throws GuardExceeded above 10^5 points.
std::vector<WeightVector> simplex_grid(std::size_t resolution, std::size_t d);

}  // namespace pluralis
