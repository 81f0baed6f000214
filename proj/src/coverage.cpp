#include "pluralis/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "pluralis/error.hpp"
#include "pluralis/welfare.hpp"

namespace pluralis {
namespace {

std::atomic<std::uint64_t> g_solver_calls{0};

constexpr std::uint64_t kSearchBudget = 200'000;
constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

struct ScalarOutcome {
    std::size_t next;
    double probability;
    double reward;
};

/// The MOMDP with rewards collapsed to w . R, plus the reachability data the
/// search needs.
class ScalarProblem {
public:
    ScalarProblem(const Momdp& momdp, const WeightVector& w) : momdp_(momdp) {
        const std::size_t n = momdp.num_states();
        rows_.resize(n);
        for (std::size_t s = 0; s < n; ++s) {
            rows_[s].resize(momdp.num_actions(s));
            for (std::size_t a = 0; a < momdp.num_actions(s); ++a)
                for (const auto& o : momdp.outcomes(s, a))
                    rows_[s][a].push_back({o.next, o.probability, linear_utility(w.values(), o.reward)});
        }
        // earliest step at which each state can be occupied
        earliest_.assign(n, std::numeric_limits<std::size_t>::max());
        std::deque<std::size_t> queue{momdp.start_state()};
        earliest_[momdp.start_state()] = 0;
        while (!queue.empty()) {
            const std::size_t s = queue.front();
            queue.pop_front();
            if (momdp.is_terminal(s) || earliest_[s] + 1 >= momdp.horizon()) continue;
            for (const auto& row : rows_[s])
                for (const auto& o : row)
                    if (o.probability > 0.0 && earliest_[o.next] == std::numeric_limits<std::size_t>::max()) {
                        earliest_[o.next] = earliest_[s] + 1;
                        queue.push_back(o.next);
                    }
        }
        for (std::size_t s = 0; s < n; ++s)
            if (!momdp.is_terminal(s) && earliest_[s] < momdp.horizon()) decision_states_.push_back(s);
        std::stable_sort(decision_states_.begin(), decision_states_.end(),
                         [&](std::size_t a, std::size_t b) { return earliest_[a] < earliest_[b]; });
    }

    const std::vector<std::size_t>& decision_states() const { return decision_states_; }

    /// Optimal time-dependent value with `forced` actions pinned, and the
    /// greedy stationary completion: each free state takes the action that is
    /// optimal at the earliest time it can be occupied.
    double bound(const std::vector<std::size_t>& forced, std::vector<std::size_t>& completion) const {
        const std::size_t n = rows_.size();
        const std::size_t horizon = momdp_.horizon();
        const double gamma = momdp_.gamma();
        std::vector<double> value(n, 0.0), next(n, 0.0);
        completion.assign(n, 0);
        for (std::size_t k = 1; k <= horizon; ++k) {
            for (std::size_t s = 0; s < n; ++s) {
                if (momdp_.is_terminal(s)) {
                    next[s] = 0.0;
                    continue;
                }
                std::size_t best_a = 0;
                double best_q = -std::numeric_limits<double>::infinity();
                const std::size_t lo = forced[s] == kUnassigned ? 0 : forced[s];
                const std::size_t hi = forced[s] == kUnassigned ? rows_[s].size() : forced[s] + 1;
                for (std::size_t a = lo; a < hi; ++a) {
                    const double q = backup(s, a, value, gamma);
                    if (q > best_q) {
                        best_q = q;
                        best_a = a;
                    }
                }
                next[s] = best_q;
                if (earliest_[s] < horizon && horizon - earliest_[s] == k) completion[s] = best_a;
            }
            value.swap(next);
        }
        return value[momdp_.start_state()];
    }

    double evaluate(const std::vector<std::size_t>& actions) const {
        const std::size_t n = rows_.size();
        const double gamma = momdp_.gamma();
        std::vector<double> value(n, 0.0), next(n, 0.0);
        for (std::size_t k = 1; k <= momdp_.horizon(); ++k) {
            for (std::size_t s = 0; s < n; ++s)
                next[s] = momdp_.is_terminal(s) ? 0.0 : backup(s, actions[s], value, gamma);
            value.swap(next);
        }
        return value[momdp_.start_state()];
    }

private:
    double backup(std::size_t s, std::size_t a, const std::vector<double>& value, double gamma) const {
        double q = 0.0;
        for (const auto& o : rows_[s][a]) q += o.probability * (o.reward + gamma * value[o.next]);
        return q;
    }

    const Momdp& momdp_;
    std::vector<std::vector<std::vector<ScalarOutcome>>> rows_;
    std::vector<std::size_t> earliest_;
    std::vector<std::size_t> decision_states_;
};

class StationarySearch {
public:
    StationarySearch(const Momdp& momdp, const ScalarProblem& problem)
        : momdp_(momdp), problem_(problem), forced_(momdp.num_states(), kUnassigned) {}

    std::vector<std::size_t> run() {
        std::vector<std::size_t> completion;
        const double root = problem_.bound(forced_, completion);
        offer(completion);
        if (best_value_ < root - slack(root)) descend(0);
        return best_actions_;
    }

    bool exhausted_budget() const { return out_of_budget_; }

private:
    static double slack(double x) { return 1e-11 * (1.0 + std::abs(x)); }

    void offer(const std::vector<std::size_t>& actions) {
        const double v = problem_.evaluate(actions);
        if (best_actions_.empty() || v > best_value_ + slack(best_value_)) {
            best_value_ = v;
            best_actions_ = actions;
        }
    }

    void descend(std::size_t depth) {
        const auto& order = problem_.decision_states();
        if (depth == order.size() || out_of_budget_) return;
        const std::size_t s = order[depth];
        std::vector<std::size_t> completion;
        for (std::size_t a = 0; a < momdp_.num_actions(s); ++a) {
            if (++nodes_ > kSearchBudget) {
                out_of_budget_ = true;
                break;
            }
            forced_[s] = a;
            const double ub = problem_.bound(forced_, completion);
            if (ub <= best_value_ + slack(best_value_)) continue;
            offer(completion);
            if (best_value_ >= ub - slack(ub)) continue;
            descend(depth + 1);
        }
        forced_[s] = kUnassigned;
    }

    const Momdp& momdp_;
    const ScalarProblem& problem_;
    std::vector<std::size_t> forced_;
    std::vector<std::size_t> best_actions_;
    double best_value_ = -std::numeric_limits<double>::infinity();
    std::uint64_t nodes_ = 0;
    bool out_of_budget_ = false;
};

Policy make_policy(const Momdp& momdp, std::vector<std::size_t> actions) {
    Policy p;
    p.id = policy_count(momdp) == std::numeric_limits<std::uint64_t>::max() ? 0 : policy_rank(momdp, actions);
    p.action_map = std::move(actions);
    return p;
}

bool same_value(const VectorReturn& a, const VectorReturn& b) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= kValueTolerance;
}

CoverageSet prune_and_number(CoverageKind kind, const Momdp& momdp, std::vector<CoverageEntry> candidates) {
    std::vector<VectorReturn> values;
    values.reserve(candidates.size());
    for (const auto& c : candidates) values.push_back(c.value);
    CoverageSet cs;
    cs.kind = kind;
    cs.momdp_fingerprint = momdp.fingerprint();
    for (std::size_t idx : pareto_front(values)) {
        cs.entries.push_back(std::move(candidates[idx]));
        cs.entries.back().policy.id = cs.entries.size() - 1;
    }
    return cs;
}

}  // namespace

const CoverageEntry& CoverageSet::entry(std::uint64_t id) const {
    for (const auto& e : entries)
        if (e.policy.id == id) return e;
    throw NotFound("policy " + std::to_string(id) + " is not in the coverage set");
}

std::vector<std::size_t> pareto_front(std::span<const VectorReturn> values) {
    if (values.empty()) throw InvalidArgument("pareto_front needs at least one value");
    const auto d = values.front().size();
    for (const auto& v : values)
        if (v.size() != d) throw DimensionMismatch(static_cast<std::size_t>(d), static_cast<std::size_t>(v.size()));

    // After a lexicographically descending sort, a dominator always precedes
    // what it dominates, and by transitivity it suffices to test against the
    // values kept so far.
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = values[a];
        const auto& vb = values[b];
        for (Eigen::Index k = 0; k < d; ++k) {
            if (va[k] != vb[k]) return va[k] > vb[k];
        }
        return false;
    });
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        const bool dominated = std::any_of(kept.begin(), kept.end(),
                                           [&](std::size_t k) { return pareto_dominates(values[k], values[idx]); });
        if (!dominated) kept.push_back(idx);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

ScalarizedSolution solve_scalarized(const Momdp& momdp, const WeightVector& w) {
    ++g_solver_calls;
    if (w.size() != momdp.num_objectives()) throw DimensionMismatch(momdp.num_objectives(), w.size());
    const ScalarProblem problem(momdp, w);
    StationarySearch search(momdp, problem);
    std::vector<std::size_t> actions = search.run();
    // states never occupied before the horizon keep action 0
    std::vector<bool> decides(momdp.num_states(), false);
    for (std::size_t s : problem.decision_states()) decides[s] = true;
    for (std::size_t s = 0; s < actions.size(); ++s)
        if (!decides[s]) actions[s] = 0;

    ScalarizedSolution out;
    out.policy = make_policy(momdp, std::move(actions));
    out.value = policy_value(momdp, out.policy);
    out.scalar_value = linear_utility(w.values(), out.value);
    out.exact = !search.exhausted_budget();
    return out;
}

CoverageSet convex_coverage_set(const Momdp& momdp, std::size_t resolution) {
    const std::vector<WeightVector> grid = simplex_grid(resolution, momdp.num_objectives());
    std::vector<ScalarizedSolution> solutions(grid.size());

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = cursor++; i < grid.size(); i = cursor++) {
            try {
                solutions[i] = solve_scalarized(momdp, grid[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t threads =
        std::min<std::size_t>(grid.size(), std::max(1U, std::thread::hardware_concurrency()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<CoverageEntry> merged;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const CoverageEntry& e) { return same_value(e.value, solutions[i].value); });
        if (it == merged.end()) {
            merged.push_back({std::move(solutions[i].policy), std::move(solutions[i].value), {grid[i]}});
        } else {
            it->witness_weights.push_back(grid[i]);
        }
    }
    return prune_and_number(CoverageKind::ConvexCoverageSet, momdp, std::move(merged));
}

CoverageSet pareto_set_bruteforce(const Momdp& momdp) {
    std::vector<CoverageEntry> all;
    for (auto& policy : enumerate_policies(momdp)) {
        VectorReturn value = policy_value(momdp, policy);
        all.push_back({std::move(policy), std::move(value), {}});
    }
    return prune_and_number(CoverageKind::ParetoSet, momdp, std::move(all));
}

std::uint64_t solver_invocations() { return g_solver_calls.load(); }

std::string to_string(CoverageKind kind) {
    return kind == CoverageKind::ParetoSet ? "pareto_set" : "convex_coverage_set";
}

Json coverage_to_json(const CoverageSet& cs) {
    Json entries = Json::array();
    for (const auto& e : cs.entries) {
        Json witnesses = Json::array();
        for (const auto& w : e.witness_weights)
            witnesses.push_back(std::vector<double>(w.values().data(), w.values().data() + w.values().size()));
        entries.push_back({
            {"policy_id", e.policy.id},
            {"action_map", e.policy.action_map},
            {"value", std::vector<double>(e.value.data(), e.value.data() + e.value.size())},
            {"witness_weights", std::move(witnesses)},
        });
    }
    return {{"kind", to_string(cs.kind)}, {"momdp_fingerprint", cs.momdp_fingerprint}, {"entries", std::move(entries)}};
}

CoverageSet coverage_from_json(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("", "coverage set must be a JSON object");
    CoverageSet cs;
    const auto kind = doc.value("kind", std::string{});
    if (kind == "pareto_set") cs.kind = CoverageKind::ParetoSet;
    else if (kind == "convex_coverage_set") cs.kind = CoverageKind::ConvexCoverageSet;
    else throw ConfigError("/kind", "expected \"pareto_set\" or \"convex_coverage_set\"");
    if (!doc.contains("momdp_fingerprint") || !doc["momdp_fingerprint"].is_string())
        throw ConfigError("/momdp_fingerprint", "required string field missing");
    cs.momdp_fingerprint = doc["momdp_fingerprint"].get<std::string>();
    if (!doc.contains("entries") || !doc["entries"].is_array() || doc["entries"].empty())
        throw ConfigError("/entries", "expected a nonempty array");

    std::set<std::uint64_t> ids;
    std::size_t d = 0;
    for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
        const Json& e = doc["entries"][i];
        const std::string path = "/entries/" + std::to_string(i);
        CoverageEntry entry;
        try {
            entry.policy.id = e.at("policy_id").get<std::uint64_t>();
            entry.policy.action_map = e.value("action_map", std::vector<std::size_t>{});
            const auto value = e.at("value").get<std::vector<double>>();
            entry.value = Eigen::Map<const Eigen::VectorXd>(value.data(), static_cast<Eigen::Index>(value.size()));
            for (const auto& w : e.value("witness_weights", Json::array())) {
                const auto ws = w.get<std::vector<double>>();
                entry.witness_weights.emplace_back(
                    Eigen::Map<const Eigen::VectorXd>(ws.data(), static_cast<Eigen::Index>(ws.size())));
            }
        } catch (const Json::exception& ex) {
            throw ConfigError(path, ex.what());
        } catch (const InvalidArgument& ex) {
            throw ConfigError(path + "/witness_weights", ex.what());
        }
        if (entry.value.size() == 0 || !entry.value.allFinite())
            throw ConfigError(path + "/value", "expected a nonempty vector of finite numbers");
        if (i == 0) d = static_cast<std::size_t>(entry.value.size());
        if (static_cast<std::size_t>(entry.value.size()) != d)
            throw ConfigError(path + "/value", "expected " + std::to_string(d) + " components");
        if (!ids.insert(entry.policy.id).second) throw ConfigError(path + "/policy_id", "duplicate policy id");
        cs.entries.push_back(std::move(entry));
    }
    return cs;
}

CoverageSet load_coverage_file(const std::filesystem::path& path) {
    return coverage_from_json(read_json_file(path));
}

void save_coverage_file(const CoverageSet& cs, const std::filesystem::path& path) {
    write_text_file(path, dump_exact_pretty(coverage_to_json(cs)) + "\n");
}

}  // namespace pluralis
