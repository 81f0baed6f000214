#include "pluralis/momdp.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "pluralis/error.hpp"

namespace pluralis {
namespace {

constexpr double kRowTolerance = 1e-9;

class Fnv1a {
public:
    void add(std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            hash_ ^= (x >> (8 * i)) & 0xFFU;
            hash_ *= 0x100000001B3ULL;
        }
    }
    void add(double x) { add(std::bit_cast<std::uint64_t>(x)); }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash_));
        return buf;
    }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

std::string sa(std::size_t s, std::size_t a) {
    return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
}

// --- JSON field helpers -----------------------------------------------------

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path + "/" + key, "required field missing");
    return *it;
}

std::size_t as_index(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(path, "expected a nonnegative integer");
    return v.get<std::size_t>();
}

double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

VectorReturn as_vector(const Json& v, std::size_t d, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    if (v.size() != d)
        throw ConfigError(path, "reward dimensionality mismatch: expected " + std::to_string(d) +
                                    " components, got " + std::to_string(v.size()));
    VectorReturn out(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "/" + std::to_string(i));
        if (!std::isfinite(out[static_cast<Eigen::Index>(i)]))
            throw ConfigError(path + "/" + std::to_string(i), "reward component not finite");
    }
    return out;
}

std::pair<std::size_t, std::size_t> as_cell(const Json& v, const GridLayout& g, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [row, col]");
    const std::size_t r = as_index(v[0], path + "/0");
    const std::size_t c = as_index(v[1], path + "/1");
    if (r >= g.rows || c >= g.cols) throw ConfigError(path, "cell outside the grid");
    return {r, c};
}

void load_common(const Json& config, Momdp::Tables& t) {
    const std::size_t d = as_index(require(config, "d", ""), "/d");
    if (d < 1 || d > kMaxObjectives)
        throw ConfigError("/d", "number of objectives must be in 1..10, got " + std::to_string(d));
    t.num_objectives = d;
    t.gamma = as_number(require(config, "gamma", ""), "/gamma");
    if (!(t.gamma >= 0.0 && t.gamma <= 1.0)) throw ConfigError("/gamma", "gamma must lie in [0, 1]");
    t.horizon = as_index(require(config, "horizon", ""), "/horizon");
    if (t.horizon < 1) throw ConfigError("/horizon", "horizon must be at least 1");
    if (auto it = config.find("objective_labels"); it != config.end()) {
        if (!it->is_array() || it->size() != d)
            throw ConfigError("/objective_labels", "expected " + std::to_string(d) + " labels");
        for (std::size_t i = 0; i < d; ++i) {
            if (!(*it)[i].is_string())
                throw ConfigError("/objective_labels/" + std::to_string(i), "expected a string");
            t.objective_labels.push_back((*it)[i].get<std::string>());
        }
    } else {
        for (std::size_t i = 0; i < d; ++i) t.objective_labels.push_back("objective_" + std::to_string(i));
    }
}

void load_gridworld(const Json& config, Momdp::Tables& t) {
    const Json& grid = require(config, "grid", "");
    const std::string gp = "/grid";
    GridLayout layout;
    layout.rows = as_index(require(grid, "rows", gp), gp + "/rows");
    layout.cols = as_index(require(grid, "cols", gp), gp + "/cols");
    if (layout.rows == 0 || layout.cols == 0) throw ConfigError(gp, "grid must be nonempty");
    if (layout.rows * layout.cols > kMaxStates) throw ConfigError(gp, "grid exceeds 10000 cells");
    const std::size_t n = layout.rows * layout.cols;
    const std::size_t d = t.num_objectives;
    layout.walls.assign(n, false);

    if (auto it = grid.find("walls"); it != grid.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            auto [r, c] = as_cell((*it)[i], layout, gp + "/walls/" + std::to_string(i));
            layout.walls[layout.state_of(r, c)] = true;
        }
    }
    t.terminal.assign(n, false);
    if (auto it = grid.find("terminals"); it != grid.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            auto [r, c] = as_cell((*it)[i], layout, gp + "/terminals/" + std::to_string(i));
            t.terminal[layout.state_of(r, c)] = true;
        }
    }
    {
        auto [r, c] = as_cell(require(grid, "start", gp), layout, gp + "/start");
        t.start_state = layout.state_of(r, c);
        if (layout.walls[t.start_state]) throw ConfigError(gp + "/start", "start cell is a wall");
    }
    VectorReturn step_reward = VectorReturn::Zero(static_cast<Eigen::Index>(d));
    if (auto it = grid.find("step_reward"); it != grid.end()) step_reward = as_vector(*it, d, gp + "/step_reward");
    std::vector<VectorReturn> cell_reward(n, VectorReturn::Zero(static_cast<Eigen::Index>(d)));
    if (auto it = grid.find("cells"); it != grid.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string cp = gp + "/cells/" + std::to_string(i);
            auto [r, c] = as_cell(require((*it)[i], "at", cp), layout, cp + "/at");
            cell_reward[layout.state_of(r, c)] += as_vector(require((*it)[i], "reward", cp), d, cp + "/reward");
        }
    }
    double slip = 0.0;
    if (auto it = grid.find("slip"); it != grid.end()) {
        slip = as_number(*it, gp + "/slip");
        if (!(slip >= 0.0 && slip < 1.0)) throw ConfigError(gp + "/slip", "slip must lie in [0, 1)");
    }

    // up, right, down, left
    constexpr int dr[4] = {-1, 0, 1, 0};
    constexpr int dc[4] = {0, 1, 0, -1};
    t.rows.assign(n, {});
    for (std::size_t r = 0; r < layout.rows; ++r) {
        for (std::size_t c = 0; c < layout.cols; ++c) {
            const std::size_t s = layout.state_of(r, c);
            t.rows[s].resize(4);
            for (std::size_t a = 0; a < 4; ++a) {
                auto& row = t.rows[s][a];
                if (t.terminal[s] || layout.walls[s]) {
                    row.push_back({s, 1.0, VectorReturn::Zero(static_cast<Eigen::Index>(d))});
                    continue;
                }
                const long nr = static_cast<long>(r) + dr[a];
                const long nc = static_cast<long>(c) + dc[a];
                std::size_t target = s;
                if (nr >= 0 && nc >= 0 && nr < static_cast<long>(layout.rows) &&
                    nc < static_cast<long>(layout.cols)) {
                    const std::size_t cand = layout.state_of(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
                    if (!layout.walls[cand]) target = cand;
                }
                if (slip > 0.0 && target != s) {
                    row.push_back({target, 1.0 - slip, step_reward + cell_reward[target]});
                    row.push_back({s, slip, step_reward + cell_reward[s]});
                } else {
                    row.push_back({target, 1.0, step_reward + cell_reward[target]});
                }
            }
        }
    }
    t.grid = std::move(layout);
}

void load_tabular(const Json& config, Momdp::Tables& t) {
    const std::size_t n = as_index(require(config, "states", ""), "/states");
    if (n == 0 || n > kMaxStates) throw ConfigError("/states", "state count must be in 1..10000");
    const std::size_t d = t.num_objectives;

    std::vector<std::size_t> num_actions(n, 1);
    const Json& actions = require(config, "actions", "");
    if (actions.is_array()) {
        if (actions.size() != n) throw ConfigError("/actions", "expected one action count per state");
        for (std::size_t s = 0; s < n; ++s) num_actions[s] = as_index(actions[s], "/actions/" + std::to_string(s));
    } else {
        num_actions.assign(n, as_index(actions, "/actions"));
    }
    for (std::size_t s = 0; s < n; ++s)
        if (num_actions[s] == 0) throw ConfigError("/actions", "state " + std::to_string(s) + " has no actions");

    t.start_state = 0;
    if (auto it = config.find("start_state"); it != config.end()) t.start_state = as_index(*it, "/start_state");
    if (t.start_state >= n) throw ConfigError("/start_state", "start state out of range");

    t.terminal.assign(n, false);
    if (auto it = config.find("terminal_states"); it != config.end()) {
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::size_t s = as_index((*it)[i], "/terminal_states/" + std::to_string(i));
            if (s >= n) throw ConfigError("/terminal_states/" + std::to_string(i), "state out of range");
            t.terminal[s] = true;
        }
    }

    t.rows.assign(n, {});
    for (std::size_t s = 0; s < n; ++s) t.rows[s].resize(num_actions[s]);
    std::vector<std::vector<bool>> seen(n);
    for (std::size_t s = 0; s < n; ++s) seen[s].assign(num_actions[s], false);

    const Json& transitions = require(config, "transitions", "");
    if (!transitions.is_array()) throw ConfigError("/transitions", "expected an array");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const std::string tp = "/transitions/" + std::to_string(i);
        const std::size_t s = as_index(require(transitions[i], "state", tp), tp + "/state");
        if (s >= n) throw ConfigError(tp + "/state", "state out of range");
        const std::size_t a = as_index(require(transitions[i], "action", tp), tp + "/action");
        if (a >= num_actions[s]) throw ConfigError(tp + "/action", "action out of range for state " + std::to_string(s));
        if (seen[s][a]) throw ConfigError(tp, "duplicate transition row for " + sa(s, a));
        seen[s][a] = true;
        const Json& next = require(transitions[i], "next", tp);
        if (!next.is_array() || next.empty()) throw ConfigError(tp + "/next", "expected [[next_state, probability], ...]");
        double total = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
            const std::string np = tp + "/next/" + std::to_string(j);
            if (!next[j].is_array() || next[j].size() != 2) throw ConfigError(np, "expected [next_state, probability]");
            const std::size_t sp = as_index(next[j][0], np + "/0");
            if (sp >= n) throw ConfigError(np + "/0", "next state out of range");
            const double p = as_number(next[j][1], np + "/1");
            if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(np + "/1", "probability must be nonnegative");
            total += p;
            t.rows[s][a].push_back({sp, p, VectorReturn::Zero(static_cast<Eigen::Index>(d))});
        }
        if (std::abs(total - 1.0) > kRowTolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "transition probabilities for " << sa(s, a) << " sum to " << total << ", expected 1";
            throw ConfigError(tp + "/next", msg.str());
        }
    }
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < num_actions[s]; ++a) {
            if (seen[s][a]) continue;
            if (!t.terminal[s]) throw ConfigError("/transitions", "missing transition row for " + sa(s, a));
            t.rows[s][a].push_back({s, 1.0, VectorReturn::Zero(static_cast<Eigen::Index>(d))});
        }
    }

    if (auto it = config.find("rewards"); it != config.end()) {
        if (!it->is_array()) throw ConfigError("/rewards", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string rp = "/rewards/" + std::to_string(i);
            const Json& entry = (*it)[i];
            const std::size_t s = as_index(require(entry, "state", rp), rp + "/state");
            if (s >= n) throw ConfigError(rp + "/state", "state out of range");
            const std::size_t a = as_index(require(entry, "action", rp), rp + "/action");
            if (a >= num_actions[s]) throw ConfigError(rp + "/action", "action out of range");
            const VectorReturn r = as_vector(require(entry, "reward", rp), d, rp + "/reward");
            std::optional<std::size_t> target;
            if (auto nt = entry.find("next_state"); nt != entry.end()) target = as_index(*nt, rp + "/next_state");
            bool matched = false;
            for (auto& o : t.rows[s][a]) {
                if (!target || o.next == *target) {
                    o.reward = r;
                    matched = true;
                }
            }
            if (!matched) throw ConfigError(rp + "/next_state", "no transition " + sa(s, a) + " -> " + std::to_string(*target));
        }
    }
}

}  // namespace

Momdp::Momdp(Tables tables) : t_(std::move(tables)) {
    const std::size_t n = t_.rows.size();
    const std::size_t d = t_.num_objectives;
    if (d < 1 || d > kMaxObjectives) throw InvalidArgument("number of objectives must be in 1..10");
    if (!(t_.gamma >= 0.0 && t_.gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
    if (t_.horizon < 1) throw InvalidArgument("horizon must be at least 1");
    if (n == 0 || n > kMaxStates) throw InvalidArgument("state count must be in 1..10000");
    if (t_.start_state >= n) throw InvalidArgument("start state out of range");
    if (t_.terminal.size() != n) throw InvalidArgument("terminal flags must cover every state");
    if (t_.objective_labels.empty())
        for (std::size_t i = 0; i < d; ++i) t_.objective_labels.push_back("objective_" + std::to_string(i));
    if (t_.objective_labels.size() != d) throw InvalidArgument("expected one label per objective");

    Fnv1a h;
    h.add(static_cast<std::uint64_t>(n));
    h.add(static_cast<std::uint64_t>(d));
    h.add(t_.gamma);
    h.add(static_cast<std::uint64_t>(t_.horizon));
    h.add(static_cast<std::uint64_t>(t_.start_state));
    for (std::size_t s = 0; s < n; ++s) {
        h.add(static_cast<std::uint64_t>(t_.terminal[s]));
        if (t_.rows[s].empty()) throw InvalidArgument("state " + std::to_string(s) + " has no actions");
        h.add(static_cast<std::uint64_t>(t_.rows[s].size()));
        for (std::size_t a = 0; a < t_.rows[s].size(); ++a) {
            const auto& row = t_.rows[s][a];
            if (row.empty()) throw InvalidArgument("empty transition row for " + sa(s, a));
            double total = 0.0;
            for (const auto& o : row) {
                if (o.next >= n) throw InvalidArgument("next state out of range in " + sa(s, a));
                if (!(o.probability >= 0.0)) throw InvalidArgument("negative probability in " + sa(s, a));
                if (static_cast<std::size_t>(o.reward.size()) != d)
                    throw InvalidArgument("reward dimensionality mismatch in " + sa(s, a));
                if (!o.reward.allFinite()) throw InvalidArgument("non-finite reward in " + sa(s, a));
                total += o.probability;
                h.add(static_cast<std::uint64_t>(o.next));
                h.add(o.probability);
                for (Eigen::Index k = 0; k < o.reward.size(); ++k) h.add(o.reward[k]);
            }
            if (std::abs(total - 1.0) > kRowTolerance)
                throw InvalidArgument("transition probabilities for " + sa(s, a) + " do not sum to 1");
        }
    }
    fingerprint_ = h.hex();
}

Momdp load_momdp(const Json& config) {
    if (!config.is_object()) throw ConfigError("", "environment config must be a JSON object");
    const Json& type = require(config, "type", "");
    if (!type.is_string()) throw ConfigError("/type", "expected \"gridworld\" or \"tabular\"");
    Momdp::Tables t;
    load_common(config, t);
    const auto kind = type.get<std::string>();
    if (kind == "gridworld") {
        load_gridworld(config, t);
    } else if (kind == "tabular") {
        load_tabular(config, t);
    } else {
        throw ConfigError("/type", "unknown environment type '" + kind + "'");
    }
    try {
        return Momdp(std::move(t));
    } catch (const InvalidArgument& e) {
        throw ConfigError("", e.what());
    }
}

Momdp load_momdp_file(const std::filesystem::path& path) {
    return load_momdp(read_json_file(path));
}

Momdp random_momdp(std::uint64_t seed, const RandomSizes& sizes) {
    if (sizes.states > 10 || sizes.actions > 3 || sizes.objectives > 3)
        std::clog << "warning: random_momdp sizes exceed the oracle profile (|S|<=10, |A|<=3, d<=3)\n";
    if (sizes.states == 0 || sizes.actions == 0) throw InvalidArgument("random_momdp needs at least one state and action");

    Rng rng(seed);
    const auto d = static_cast<Eigen::Index>(sizes.objectives);
    Momdp::Tables t;
    t.num_objectives = sizes.objectives;
    t.gamma = sizes.gamma;
    t.horizon = sizes.horizon;
    t.start_state = 0;
    t.terminal.assign(sizes.states, false);
    t.rows.assign(sizes.states, std::vector<std::vector<Outcome>>(sizes.actions));
    for (std::size_t s = 0; s < sizes.states; ++s) {
        for (std::size_t a = 0; a < sizes.actions; ++a) {
            auto& row = t.rows[s][a];
            double total = 0.0;
            for (std::size_t sp = 0; sp < sizes.states; ++sp) {
                // (0, 1] keeps every successor reachable
                const double w = 1.0 - rng.uniform();
                total += w;
                row.push_back({sp, w, VectorReturn(d)});
            }
            for (auto& o : row) {
                o.probability /= total;
                for (Eigen::Index k = 0; k < d; ++k) o.reward[k] = rng.uniform(-1.0, 1.0);
            }
        }
    }
    return Momdp(std::move(t));
}

void validate_policy(const Momdp& momdp, const Policy& policy) {
    if (policy.action_map.size() != momdp.num_states())
        throw InvalidArgument("policy covers " + std::to_string(policy.action_map.size()) + " states, model has " +
                              std::to_string(momdp.num_states()));
    for (std::size_t s = 0; s < momdp.num_states(); ++s) {
        if (momdp.is_terminal(s)) continue;
        if (policy.action_map[s] >= momdp.num_actions(s))
            throw InvalidArgument("policy action " + std::to_string(policy.action_map[s]) + " invalid at state " +
                                  std::to_string(s));
    }
}

const Outcome& sample_outcome(const Momdp& momdp, std::size_t s, std::size_t a, Rng& rng) {
    const auto row = momdp.outcomes(s, a);
    if (row.size() == 1) return row.front();
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& o : row) {
        acc += o.probability;
        if (u < acc) return o;
    }
    return row.back();
}

Trajectory rollout(const Momdp& momdp, const Policy& policy, std::uint64_t seed) {
    Trajectory traj;
    traj.seed = seed;
    traj.num_objectives = momdp.num_objectives();
    Rng rng(seed);
    std::size_t s = momdp.start_state();
    for (std::size_t t = 0; t < momdp.horizon() && !momdp.is_terminal(s); ++t) {
        if (s >= policy.action_map.size() || policy.action_map[s] >= momdp.num_actions(s))
            throw InvalidArgument("policy has no valid action for visited state " + std::to_string(s));
        const std::size_t a = policy.action_map[s];
        const Outcome& o = sample_outcome(momdp, s, a, rng);
        traj.steps.push_back({s, a, o.next, o.reward});
        s = o.next;
    }
    return traj;
}

VectorReturn discounted_return(const Trajectory& trajectory, double gamma) {
    const auto& steps = trajectory.steps;
    const Eigen::Index d =
        steps.empty() ? static_cast<Eigen::Index>(trajectory.num_objectives) : steps.front().reward.size();
    VectorReturn g = VectorReturn::Zero(d);
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        g = (it->reward + gamma * g).eval();
    }
    return g;
}

Eigen::MatrixXd policy_value_table(const Momdp& momdp, const Policy& policy, std::size_t steps_to_go) {
    validate_policy(momdp, policy);
    const auto n = static_cast<Eigen::Index>(momdp.num_states());
    const auto d = static_cast<Eigen::Index>(momdp.num_objectives());
    const double gamma = momdp.gamma();
    Eigen::MatrixXd value = Eigen::MatrixXd::Zero(n, d);
    Eigen::MatrixXd next(n, d);
    for (std::size_t k = 0; k < steps_to_go; ++k) {
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto su = static_cast<std::size_t>(s);
            if (momdp.is_terminal(su)) {
                next.row(s).setZero();
                continue;
            }
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
            for (const auto& o : momdp.outcomes(su, policy.action_map[su]))
                acc += o.probability * (o.reward.transpose() + gamma * value.row(static_cast<Eigen::Index>(o.next)));
            next.row(s) = acc;
        }
        value.swap(next);
    }
    return value;
}

VectorReturn policy_value(const Momdp& momdp, const Policy& policy) {
    return policy_value_table(momdp, policy, momdp.horizon())
        .row(static_cast<Eigen::Index>(momdp.start_state()))
        .transpose();
}

std::uint64_t policy_count(const Momdp& momdp) {
    std::uint64_t count = 1;
    for (std::size_t s = 0; s < momdp.num_states(); ++s) {
        if (momdp.is_terminal(s)) continue;
        const std::uint64_t k = momdp.num_actions(s);
        if (count > std::numeric_limits<std::uint64_t>::max() / k) return std::numeric_limits<std::uint64_t>::max();
        count *= k;
    }
    return count;
}

std::uint64_t policy_rank(const Momdp& momdp, const std::vector<std::size_t>& action_map) {
    std::uint64_t rank = 0;
    for (std::size_t s = 0; s < momdp.num_states(); ++s) {
        if (momdp.is_terminal(s)) continue;
        rank = rank * momdp.num_actions(s) + action_map[s];
    }
    return rank;
}

std::vector<Policy> enumerate_policies(const Momdp& momdp) {
    const std::uint64_t count = policy_count(momdp);
    if (count > kEnumerationGuard) {
        // describe the count as a power when every decision state has the same arity
        std::map<std::size_t, std::size_t> arity;
        for (std::size_t s = 0; s < momdp.num_states(); ++s)
            if (!momdp.is_terminal(s)) ++arity[momdp.num_actions(s)];
        std::string expr;
        for (const auto& [k, m] : arity) {
            if (!expr.empty()) expr += " * ";
            expr += std::to_string(k) + "^" + std::to_string(m);
        }
        const std::string total = count == std::numeric_limits<std::uint64_t>::max() ? "more than 2^64"
                                                                                      : std::to_string(count);
        throw GuardExceeded("refusing to enumerate " + expr + " = " + total +
                            " deterministic policies (guard: 1000000)");
    }
    std::vector<std::size_t> decision_states;
    for (std::size_t s = 0; s < momdp.num_states(); ++s)
        if (!momdp.is_terminal(s)) decision_states.push_back(s);

    std::vector<Policy> out;
    out.reserve(count);
    std::vector<std::size_t> actions(momdp.num_states(), 0);
    for (std::uint64_t id = 0; id < count; ++id) {
        out.push_back({id, actions});
        // increment the mixed-radix counter, last decision state least significant
        for (auto it = decision_states.rbegin(); it != decision_states.rend(); ++it) {
            if (++actions[*it] < momdp.num_actions(*it)) break;
            actions[*it] = 0;
        }
    }
    return out;
}

std::vector<std::string> render_grid(const Momdp& momdp, std::size_t agent_state) {
    std::vector<std::string> lines;
    const auto& grid = momdp.grid();
    if (!grid) return lines;
    for (std::size_t r = 0; r < grid->rows; ++r) {
        std::string line;
        for (std::size_t c = 0; c < grid->cols; ++c) {
            const std::size_t s = grid->state_of(r, c);
            char ch = '.';
            if (grid->walls[s]) ch = '#';
            else if (momdp.is_terminal(s)) ch = 'T';
            else if (s == momdp.start_state()) ch = 'S';
            if (s == agent_state) ch = 'A';
            line += ch;
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

Json momdp_summary(const Momdp& momdp) {
    std::size_t pairs = 0;
    for (std::size_t s = 0; s < momdp.num_states(); ++s) pairs += momdp.num_actions(s);
    Json j{
        {"fingerprint", momdp.fingerprint()},
        {"num_states", momdp.num_states()},
        {"num_state_actions", pairs},
        {"d", momdp.num_objectives()},
        {"gamma", momdp.gamma()},
        {"horizon", momdp.horizon()},
        {"start_state", momdp.start_state()},
        {"objective_labels", momdp.objective_labels()},
    };
    if (momdp.grid()) {
        j["grid"] = {{"rows", momdp.grid()->rows}, {"cols", momdp.grid()->cols}};
    } else {
        j["grid"] = nullptr;
    }
    return j;
}

}  // namespace pluralis
