#pragma once

// Scalarisations of a vector return: linear utility, the Generalised Gini
// welfare function (GGF), its prioritised form and Nash social welfare.
// All functions accept any Eigen vector expression.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pluralis/error.hpp"

namespace pluralis {

inline constexpr double kMonotoneTolerance = 1e-12;

namespace detail {

template <typename DA, typename DB>
void check_same_size(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    if (a.size() != b.size())
        throw DimensionMismatch(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
}

}  // namespace detail

/// Throws InvalidArgument unless `w` is nonnegative, non-increasing (up to
/// 1e-12 per adjacent pair) and sums to 1 within 1e-9.
template <typename DW>
void validate_ggf_weights(const Eigen::MatrixBase<DW>& w) {
    if (w.size() == 0) throw InvalidArgument("GGF weights are empty");
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!std::isfinite(static_cast<double>(w[i])) || w[i] < 0)
            throw InvalidArgument("GGF weight " + std::to_string(i) + " is negative or not finite");
        if (i > 0 && w[i] > w[i - 1] + kMonotoneTolerance)
            throw InvalidArgument("GGF weights must be non-increasing (weight " + std::to_string(i) +
                                  " exceeds weight " + std::to_string(i - 1) + ")");
    }
    if (std::abs(static_cast<double>(w.sum()) - 1.0) > 1e-9) throw InvalidArgument("GGF weights must sum to 1");
}

template <typename DW, typename DV>
typename DV::Scalar linear_utility(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DV>& v) {
    detail::check_same_size(w, v);
    typename DV::Scalar total(0);
    for (Eigen::Index i = 0; i < v.size(); ++i) total += w[i] * v[i];
    return total;
}

/// Ascending (stable) copy of `v`.
template <typename DV>
Eigen::Matrix<typename DV::Scalar, Eigen::Dynamic, 1> sorted_ascending(const Eigen::MatrixBase<DV>& v) {
    Eigen::Matrix<typename DV::Scalar, Eigen::Dynamic, 1> out = v;
    std::stable_sort(out.data(), out.data() + out.size());
    return out;
}

/// sum_i w_i * v_(i) where v_(1) <= ... <= v_(d). Weights must be non-increasing,
/// so the worst-off component receives the largest weight.
template <typename DW, typename DV>
typename DV::Scalar ggf(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DV>& v) {
    detail::check_same_size(w, v);
    validate_ggf_weights(w);
    const auto sorted = sorted_ascending(v);
    typename DV::Scalar total(0);
    for (Eigen::Index i = 0; i < sorted.size(); ++i) total += w[i] * sorted[i];
    return total;
}

/// Prioritised GGF: each component is scaled by its strictly positive
/// priority before the Gini sort, i.e. ggf(w, p .* v).
template <typename DW, typename DP, typename DV>
typename DV::Scalar generalized_ggf(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DP>& p,
                                    const Eigen::MatrixBase<DV>& v) {
    detail::check_same_size(p, v);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p[i] > 0) || !std::isfinite(static_cast<double>(p[i])))
            throw InvalidArgument("GGGF priority " + std::to_string(i) + " must be strictly positive");
    }
    return ggf(w, p.cwiseProduct(v));
}

/// Geometric mean of the components. Zero if any component is zero;
/// DomainError if any is negative.
template <typename DV>
typename DV::Scalar nsw(const Eigen::MatrixBase<DV>& v) {
    using Scalar = typename DV::Scalar;
    using std::exp;
    using std::log;
    if (v.size() == 0) throw DimensionMismatch(1, 0);
    bool zero = false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < 0 || std::isnan(static_cast<double>(v[i])))
            throw DomainError("NSW undefined for negative component " + std::to_string(i) + " (" +
                              std::to_string(static_cast<double>(v[i])) + ")");
        if (v[i] == 0) zero = true;
    }
    if (zero) return Scalar(0);
    Scalar log_sum(0);
    for (Eigen::Index i = 0; i < v.size(); ++i) log_sum += log(v[i]);
    return exp(log_sum / static_cast<Scalar>(v.size()));
}

}  // namespace pluralis
