#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pluralis/error.hpp"
#include "pluralis/json_io.hpp"
#include "pluralis/momdp.hpp"
#include "pluralis/weights.hpp"

namespace pluralis {

inline constexpr double kValueTolerance = 1e-9;

enum class CoverageKind { ParetoSet, ConvexCoverageSet };

struct CoverageEntry {
    Policy policy;  // id unique within the set; sets built here number entries 0..n-1
    VectorReturn value;
    std::vector<WeightVector> witness_weights;
};

/// Mutually non-dominated policies with their expected vector returns.
struct CoverageSet {
    CoverageKind kind = CoverageKind::ParetoSet;
    std::string momdp_fingerprint;
    std::vector<CoverageEntry> entries;

    std::size_t num_objectives() const {
        return entries.empty() ? 0 : static_cast<std::size_t>(entries.front().value.size());
    }

    /// Entry whose policy id equals `id`; throws NotFound.
    const CoverageEntry& entry(std::uint64_t id) const;
};

/// a >= b componentwise with at least one strict >. No tolerance.
template <typename DA, typename DB>
bool pareto_dominates(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
    if (a.size() != b.size())
        throw DimensionMismatch(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

/// Indices of the non-dominated values, ascending. Equal values are all kept.
std::vector<std::size_t> pareto_front(std::span<const VectorReturn> values);

struct ScalarizedSolution {
    Policy policy;
    VectorReturn value;     // policy_value of `policy`
    double scalar_value = 0.0;  // w . value
    bool exact = true;      // false only if the search budget ran out
};

/// Best deterministic stationary policy for the scalar reward w . R.
///
/// Finite-horizon value iteration gives the optimum over time-dependent
/// policies, which bounds every stationary policy from above. When the greedy
/// stationary policy read off those tables attains the bound it is returned
/// directly; otherwise a depth-first branch and bound over per-state actions
/// (ascending action index) finds the stationary optimum, pruning subtrees
/// whose value-iteration bound cannot beat the incumbent. Argmax ties go to
/// the lowest action index.
ScalarizedSolution solve_scalarized(const Momdp& momdp, const WeightVector& w);

/// Runs solve_scalarized at every point of the uniform simplex grid and keeps
/// the distinct undominated values (equal within 1e-9). Each entry remembers
/// the grid weights that produced it. Grid points are solved in parallel and
/// merged in grid order.
CoverageSet convex_coverage_set(const Momdp& momdp, std::size_t resolution);

/// Evaluates every deterministic policy and keeps the Pareto front.
CoverageSet pareto_set_bruteforce(const Momdp& momdp);

/// Number of solve_scalarized calls made by this process so far.
std::uint64_t solver_invocations();

Json coverage_to_json(const CoverageSet& cs);
CoverageSet coverage_from_json(const Json& doc);
CoverageSet load_coverage_file(const std::filesystem::path& path);
void save_coverage_file(const CoverageSet& cs, const std::filesystem::path& path);

std::string to_string(CoverageKind kind);

}  // namespace pluralis
