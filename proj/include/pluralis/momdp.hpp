#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pluralis/json_io.hpp"

namespace pluralis {

/// Expected or sampled return of a policy: one component per objective.
using VectorReturn = Eigen::VectorXd;

inline constexpr std::size_t kMaxObjectives = 10;
inline constexpr std::size_t kMaxStates = 10'000;
inline constexpr std::uint64_t kEnumerationGuard = 1'000'000;

/// Deterministic 64-bit generator. Doubles are built from the top 53 bits so
/// draws are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

struct Outcome {
    std::size_t next = 0;
    double probability = 0.0;
    VectorReturn reward;
};

/// Optional rectangular layout kept for rendering gridworld states.
struct GridLayout {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<bool> walls;  // row-major, rows * cols

    std::size_t state_of(std::size_t row, std::size_t col) const { return row * cols + col; }
};

/// Finite-horizon multi-objective MDP with tabular transitions and a vector
/// reward on every (s, a, s') triple. Immutable once constructed.
class Momdp {
public:
    struct Tables {
        std::size_t num_objectives = 1;
        double gamma = 1.0;
        std::size_t horizon = 1;
        std::size_t start_state = 0;
        std::vector<bool> terminal;                         // size |S|
        std::vector<std::vector<std::vector<Outcome>>> rows;  // rows[s][a]
        std::vector<std::string> objective_labels;
        std::optional<GridLayout> grid;
    };

    /// Validates every invariant; throws InvalidArgument naming the offending entry.
    explicit Momdp(Tables tables);

    std::size_t num_states() const { return t_.rows.size(); }
    std::size_t num_actions(std::size_t s) const { return t_.rows[s].size(); }
    std::size_t num_objectives() const { return t_.num_objectives; }
    double gamma() const { return t_.gamma; }
    std::size_t horizon() const { return t_.horizon; }
    std::size_t start_state() const { return t_.start_state; }
    bool is_terminal(std::size_t s) const { return t_.terminal[s]; }
    std::span<const Outcome> outcomes(std::size_t s, std::size_t a) const { return t_.rows[s][a]; }
    const std::vector<std::string>& objective_labels() const { return t_.objective_labels; }
    const std::optional<GridLayout>& grid() const { return t_.grid; }

    /// Hex digest of the full model (FNV-1a over the exact bit patterns).
    const std::string& fingerprint() const { return fingerprint_; }

    /// Copy of the underlying tables, for building derived models.
    const Tables& tables() const { return t_; }

private:
    Tables t_;
    std::string fingerprint_;
};

/// Deterministic stationary policy. Terminal states carry action 0.
struct Policy {
    std::uint64_t id = 0;
    std::vector<std::size_t> action_map;

    friend bool operator==(const Policy&, const Policy&) = default;
};

struct TrajectoryStep {
    std::size_t state = 0;
    std::size_t action = 0;
    std::size_t next_state = 0;
    VectorReturn reward;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::uint64_t seed = 0;
    std::size_t num_objectives = 0;  // size of the zero return of an empty trajectory
};

struct RandomSizes {
    std::size_t states = 4;
    std::size_t actions = 2;
    std::size_t objectives = 2;
    std::size_t horizon = 5;
    double gamma = 0.9;
};

Momdp load_momdp(const Json& config);
Momdp load_momdp_file(const std::filesystem::path& path);

/// Random model for oracle tests: dense transitions drawn then normalized,
/// rewards uniform in [-1, 1]. Same seed and sizes give a bit-identical model.
/// Sizes above the oracle profile (|S| <= 10, |A| <= 3, d <= 3) only warn.
Momdp random_momdp(std::uint64_t seed, const RandomSizes& sizes);

/// Throws InvalidArgument unless the policy names a valid action for every
/// non-terminal state.
void validate_policy(const Momdp& momdp, const Policy& policy);

/// Samples one transition of (s, a) with `rng`.
const Outcome& sample_outcome(const Momdp& momdp, std::size_t s, std::size_t a, Rng& rng);

/// Runs one episode from the start state until a terminal state or the horizon.
Trajectory rollout(const Momdp& momdp, const Policy& policy, std::uint64_t seed);

/// sum_t gamma^t R_t, evaluated back to front so that
/// G(traj) == R_0 + gamma * G(tail) holds exactly in floating point.
VectorReturn discounted_return(const Trajectory& trajectory, double gamma);

/// Exact expected discounted vector return from the start state by
/// finite-horizon dynamic programming over all objectives at once.
VectorReturn policy_value(const Momdp& momdp, const Policy& policy);

/// Per-state values (|S| x d) for `steps_to_go` remaining steps.
Eigen::MatrixXd policy_value_table(const Momdp& momdp, const Policy& policy, std::size_t steps_to_go);

/// Number of deterministic stationary policies, saturating at UINT64_MAX.
std::uint64_t policy_count(const Momdp& momdp);

/// Lexicographic rank of an action map (state 0 most significant).
std::uint64_t policy_rank(const Momdp& momdp, const std::vector<std::size_t>& action_map);

/// Every deterministic stationary policy in lexicographic order of its action
/// map; ids equal the rank. Refuses (GuardExceeded) above 10^6 policies.
std::vector<Policy> enumerate_policies(const Momdp& momdp);

/// ASCII rendering of a gridworld with the agent at `agent_state`, one string per row.
std::vector<std::string> render_grid(const Momdp& momdp, std::size_t agent_state);

Json momdp_summary(const Momdp& momdp);

}  // namespace pluralis
