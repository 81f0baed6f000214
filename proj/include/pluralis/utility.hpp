#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pluralis/coverage.hpp"
#include "pluralis/json_io.hpp"
#include "pluralis/weights.hpp"
#include "pluralis/welfare.hpp"

namespace pluralis {

struct UtilitySpec;

struct LinearUtility {
    WeightVector weights;
};

struct GgfUtility {
    Eigen::VectorXd weights;
};

struct GggfUtility {
    Eigen::VectorXd weights;
    Eigen::VectorXd priorities;
};

struct NswUtility {};

/// GGF over the utilities of n personalised member functions of the same
/// vector return. Members are Linear or GGF; no nesting.
struct PluralisticGgfUtility {
    Eigen::VectorXd weights;
    std::vector<UtilitySpec> members;
};

/// One scalarisation of a vector return. Use the factories: they enforce
/// every parameter invariant, so a constructed spec is always evaluable.
struct UtilitySpec {
    using Variant = std::variant<LinearUtility, GgfUtility, GggfUtility, NswUtility, PluralisticGgfUtility>;

    Variant variant;
    std::string label;

    static UtilitySpec linear(WeightVector w, std::string label = {});
    static UtilitySpec make_ggf(Eigen::VectorXd w, std::string label = {});
    static UtilitySpec make_gggf(Eigen::VectorXd w, Eigen::VectorXd priorities, std::string label = {});
    static UtilitySpec make_nsw(std::string label = {});
    static UtilitySpec pluralistic_ggf(Eigen::VectorXd w, std::vector<UtilitySpec> members, std::string label = {});

    /// Number of objectives the spec consumes; empty for NSW (any d).
    std::optional<std::size_t> dimension() const;

    /// "linear", "ggf", "gggf", "nsw" or "pluralistic_ggf".
    std::string variant_name() const;

    bool is_linear() const { return std::holds_alternative<LinearUtility>(variant); }
};

/// u_i(v) for every member, in member order.
Eigen::VectorXd member_utilities(const PluralisticGgfUtility& spec, const VectorReturn& v);

/// GGF of the member utilities; errors carry the failing member's index.
double pluralistic_ggf(const PluralisticGgfUtility& spec, const VectorReturn& v);

/// Single dispatch point for every variant.
double evaluate(const UtilitySpec& spec, const VectorReturn& v);

struct SelectionResult {
    std::uint64_t policy_id = 0;
    double utility = 0.0;
    std::vector<std::pair<std::uint64_t, double>> ranking;  // descending utility, ties by id
};

/// Evaluates `spec` on every entry and returns the argmax (ties to the lowest
/// policy id) with the full ranking. Touches no model or solver.
SelectionResult select_policy(const CoverageSet& cs, const UtilitySpec& spec);

UtilitySpec utility_from_json(const Json& doc, const std::string& path = "");
Json utility_to_json(const UtilitySpec& spec);
UtilitySpec load_utility_file(const std::filesystem::path& path);

Json selection_to_json(const SelectionResult& result);

}  // namespace pluralis
