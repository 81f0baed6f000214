#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "pluralis/coverage.hpp"
#include "pluralis/error.hpp"
#include "pluralis/welfare.hpp"
#include "test_support.hpp"

using namespace pluralis;
using namespace pluralis::testing;

namespace {

// all-pairs dominance scan, written independently of pareto_front
std::vector<std::size_t> quadratic_front(const std::vector<VectorReturn>& values) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < values.size() && !dominated; ++j) {
            bool ge = true, gt = false;
            for (Eigen::Index k = 0; k < values[i].size(); ++k) {
                ge = ge && values[j][k] >= values[i][k];
                gt = gt || values[j][k] > values[i][k];
            }
            dominated = ge && gt;
        }
        if (!dominated) out.push_back(i);
    }
    return out;
}

double brute_force_best(const Momdp& m, const WeightVector& w) {
    double best = -1e300;
    for (const auto& p : enumerate_policies(m)) best = std::max(best, policy_value(m, p).dot(w.values()));
    return best;
}

bool contains_value(const CoverageSet& cs, const VectorReturn& v) {
    return std::any_of(cs.entries.begin(), cs.entries.end(), [&](const CoverageEntry& e) {
        return (e.value - v).cwiseAbs().maxCoeff() <= kValueTolerance;
    });
}

void check_internal_nondominance(const CoverageSet& cs) {
    for (const auto& a : cs.entries)
        for (const auto& b : cs.entries) CHECK_FALSE(pareto_dominates(a.value, b.value));
}

}  // namespace

TEST_CASE("pareto_dominates") {
    CHECK(pareto_dominates(vec({2, 3}), vec({1, 3})));
    CHECK_FALSE(pareto_dominates(vec({2, 3}), vec({2, 3})));
    CHECK_FALSE(pareto_dominates(vec({2, 1}), vec({1, 2})));
    CHECK_FALSE(pareto_dominates(vec({1, 2}), vec({2, 1})));
    // strict comparison: no tolerance
    CHECK(pareto_dominates(vec({1.0 + 1e-15, 2}), vec({1, 2})));
    CHECK_THROWS_AS(pareto_dominates(vec({1, 2}), vec({1, 2, 3})), DimensionMismatch);
}

TEST_CASE("pareto_front") {
    CHECK(pareto_front(std::vector{vec({1, 2}), vec({2, 1}), vec({0, 0})}) == std::vector<std::size_t>{0, 1});
    CHECK(pareto_front(std::vector{vec({1, 1}), vec({1, 1})}) == std::vector<std::size_t>{0, 1});
    CHECK_THROWS_AS(pareto_front(std::vector<VectorReturn>{}), InvalidArgument);
    CHECK_THROWS_AS(pareto_front(std::vector{vec({1, 2}), vec({1})}), DimensionMismatch);
}

TEST_CASE("pareto_front matches the all-pairs oracle on random 3-vectors") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed);
        std::vector<VectorReturn> values;
        for (int i = 0; i < 100; ++i) {
            // coarse values so that ties and duplicates occur
            VectorReturn v(3);
            for (int k = 0; k < 3; ++k) v[k] = std::floor(rng.uniform(0.0, 6.0));
            values.push_back(v);
        }
        CHECK(pareto_front(values) == quadratic_front(values));
    }
}

TEST_CASE("solve_scalarized on a two-armed bandit") {
    const Momdp bandit = make_bandit({vec({3, 0}), vec({0, 5})});
    auto first = solve_scalarized(bandit, WeightVector(vec({1, 0})));
    CHECK(first.policy.action_map[0] == 0);
    CHECK(first.value == vec({3, 0}));
    auto second = solve_scalarized(bandit, WeightVector(vec({0, 1})));
    CHECK(second.policy.action_map[0] == 1);
    CHECK(second.scalar_value == 5.0);
    // exact tie: lowest action index
    const Momdp tied = make_bandit({vec({1, 0}), vec({0, 1})});
    CHECK(solve_scalarized(tied, WeightVector(vec({0.5, 0.5}))).policy.action_map[0] == 0);
}

TEST_CASE("solve_scalarized equals the brute-force optimum over stationary policies") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const RandomSizes sizes{2 + seed % 5, 2 + seed % 2, 2 + seed % 2, 2 + seed % 5, seed % 3 == 0 ? 1.0 : 0.9};
        const Momdp m = random_momdp(seed, sizes);
        const Momdp det = random_deterministic_momdp(seed, 6, 3, 2, 2 + seed % 7);
        for (std::size_t r : {1, 3, 7}) {
            for (const auto& w : simplex_grid(r, m.num_objectives())) {
                const auto sol = solve_scalarized(m, w);
                CHECK(sol.exact);
                CHECK(std::abs(sol.scalar_value - brute_force_best(m, w)) <= 1e-9);
                CHECK((sol.value - policy_value(m, sol.policy)).cwiseAbs().maxCoeff() == 0.0);
                ++checked;
            }
            for (const auto& w : simplex_grid(r, 2)) {
                const auto sol = solve_scalarized(det, w);
                CHECK(std::abs(sol.scalar_value - brute_force_best(det, w)) <= 1e-9);
            }
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("solve_scalarized handles horizons where the time-dependent optimum is not stationary") {
    // Looping 0 -> 1 -> 0 earns 0.5 per round trip and exiting from 1 pays 1, from 0 pays 0.6.
    // Which action is best at each state depends on the steps left, so the
    // time-dependent optimum changes its mind and the stationary search must resolve it.
    Momdp::Tables t;
    t.num_objectives = 1;
    t.gamma = 1.0;
    t.terminal = {false, false, true};
    t.rows = {{{{1, 1.0, vec({0})}}, {{2, 1.0, vec({0.6})}}},
              {{{0, 1.0, vec({0.5})}}, {{2, 1.0, vec({1})}}},
              {{{2, 1.0, vec({0})}}}};
    for (std::size_t horizon = 1; horizon <= 8; ++horizon) {
        t.horizon = horizon;
        const Momdp m(t);
        const WeightVector w(vec({1}));
        CAPTURE(horizon);
        CHECK(std::abs(solve_scalarized(m, w).scalar_value - brute_force_best(m, w)) <= 1e-12);
    }
}

TEST_CASE("convex_coverage_set on a three-armed bandit keeps only supported arms") {
    // w.(3,0) = 3 w1, w.(0,5) = 5 (1 - w1), w.(1,1) = 1: the last never exceeds max(3 w1, 5 - 5 w1) >= 15/8
    const Momdp bandit = make_bandit({vec({3, 0}), vec({0, 5}), vec({1, 1})});
    const CoverageSet cs = convex_coverage_set(bandit, 10);
    REQUIRE(cs.entries.size() == 2);
    CHECK(cs.kind == CoverageKind::ConvexCoverageSet);
    CHECK(cs.momdp_fingerprint == bandit.fingerprint());
    // grid order is ascending in w1, so (0,5) appears first
    CHECK(cs.entries[0].value == vec({0, 5}));
    CHECK(cs.entries[1].value == vec({3, 0}));
    CHECK(cs.entries[0].policy.id == 0);
    CHECK(cs.entries[1].policy.id == 1);
    // (0,5) wins for w1 <= 0.5 (w1 = 0.625 breaks even), i.e. grid points 0.0 .. 0.6
    CHECK(cs.entries[0].witness_weights.size() == 7);
    CHECK(cs.entries[1].witness_weights.size() == 4);
}

TEST_CASE("convex_coverage_set with one objective returns the scalar optimum") {
    const Momdp m = load_momdp_file(data_path("scalar.json"));
    const CoverageSet cs = convex_coverage_set(m, 10);
    REQUIRE(cs.entries.size() == 1);
    CHECK(std::abs(cs.entries[0].value[0] - brute_force_best(m, WeightVector(vec({1})))) <= 1e-12);
}

TEST_CASE("pareto_set_bruteforce") {
    SUBCASE("incomparable arms") {
        CHECK(pareto_set_bruteforce(make_bandit({vec({1, 0}), vec({0, 1})})).entries.size() == 2);
    }
    SUBCASE("dominated arm removed") {
        const CoverageSet cs = pareto_set_bruteforce(make_bandit({vec({1, 1}), vec({0, 0})}));
        REQUIRE(cs.entries.size() == 1);
        CHECK(cs.entries[0].value == vec({1, 1}));
        CHECK(cs.entries[0].witness_weights.empty());
    }
    SUBCASE("superset of the CCS values for seed 7") {
        const Momdp m = random_momdp(7, {4, 2, 2, 5});
        const CoverageSet front = pareto_set_bruteforce(m);
        const CoverageSet ccs = convex_coverage_set(m, 20);
        for (const auto& e : ccs.entries) CHECK(contains_value(front, e.value));
        check_internal_nondominance(front);
    }
}

TEST_CASE("CCS invariants on random oracle-scale models") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        const RandomSizes sizes{3 + seed % 4, 2 + seed % 2, 2 + seed % 2, 3 + seed % 4};
        const Momdp m = random_momdp(1000 + seed, sizes);
        const CoverageSet ccs = convex_coverage_set(m, 12);
        const CoverageSet front = pareto_set_bruteforce(m);
        check_internal_nondominance(ccs);
        for (const auto& e : ccs.entries) {
            CHECK(contains_value(front, e.value));
            // witness optimality against every other entry
            for (const auto& w : e.witness_weights)
                for (const auto& other : ccs.entries)
                    CHECK(e.value.dot(w.values()) >= other.value.dot(w.values()) - 1e-9);
        }
        // determinism, including ids and order
        const CoverageSet again = convex_coverage_set(m, 12);
        REQUIRE(again.entries.size() == ccs.entries.size());
        for (std::size_t i = 0; i < ccs.entries.size(); ++i) {
            CHECK(again.entries[i].policy == ccs.entries[i].policy);
            CHECK(again.entries[i].value == ccs.entries[i].value);
            CHECK(again.entries[i].witness_weights.size() == ccs.entries[i].witness_weights.size());
        }
    }
}

TEST_CASE("doubling the resolution keeps every CCS value on deterministic models") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const Momdp m = random_deterministic_momdp(seed, 5, 3, 2, 5);
        for (std::size_t k : {2, 3, 5}) {
            const CoverageSet coarse = convex_coverage_set(m, k);
            const CoverageSet fine = convex_coverage_set(m, 2 * k);
            for (const auto& e : coarse.entries) CHECK(contains_value(fine, e.value));
        }
    }
}

TEST_CASE("simplex grid") {
    const auto grid = simplex_grid(2, 2);
    REQUIRE(grid.size() == 3);
    CHECK(grid[0].values() == vec({0, 1}));
    CHECK(grid[1].values() == vec({0.5, 0.5}));
    CHECK(grid[2].values() == vec({1, 0}));
    CHECK(simplex_grid(1, 3).size() == 3);
    CHECK(simplex_grid(20, 3).size() == 231);
    CHECK(simplex_grid_size(20, 3) == 231);
    CHECK(simplex_grid_size(10, 10) == 92378);
    for (const auto& w : simplex_grid(7, 4)) CHECK(std::abs(w.values().sum() - 1.0) <= 1e-9);
}

TEST_CASE("grid guard refuses oversized simplex grids") {
    CHECK(simplex_grid_size(100, 4) == 176851);
    try {
        simplex_grid(100, 4);
        FAIL("expected GuardExceeded");
    } catch (const GuardExceeded& e) {
        CHECK(std::string(e.what()).find("176851") != std::string::npos);
    }
    const Momdp m = random_momdp(2, {2, 2, 10, 2});
    CHECK_THROWS_AS(convex_coverage_set(m, 12), GuardExceeded);
    CHECK_NOTHROW(convex_coverage_set(m, 1));
}

TEST_CASE("weight vectors must lie on the simplex") {
    CHECK_THROWS_AS(WeightVector(vec({0.5, 0.6})), InvalidArgument);
    CHECK_THROWS_AS(WeightVector(vec({1.5, -0.5})), InvalidArgument);
    CHECK_NOTHROW(WeightVector(vec({0.5, 0.5 + 1e-10})));
    CHECK(WeightVector::normalized(vec({2, 6})).values() == vec({0.25, 0.75}));
}

TEST_CASE("coverage set JSON round trip is bit-exact") {
    const Momdp m = random_momdp(5, {4, 3, 3, 4, 0.93});
    const CoverageSet cs = convex_coverage_set(m, 6);
    const auto path = std::filesystem::temp_directory_path() / "pluralis_cs_roundtrip.json";
    save_coverage_file(cs, path);
    const CoverageSet back = load_coverage_file(path);
    std::filesystem::remove(path);
    CHECK(back.kind == cs.kind);
    CHECK(back.momdp_fingerprint == cs.momdp_fingerprint);
    REQUIRE(back.entries.size() == cs.entries.size());
    for (std::size_t i = 0; i < cs.entries.size(); ++i) {
        CHECK(back.entries[i].policy == cs.entries[i].policy);
        CHECK(back.entries[i].value == cs.entries[i].value);
        REQUIRE(back.entries[i].witness_weights.size() == cs.entries[i].witness_weights.size());
        for (std::size_t k = 0; k < cs.entries[i].witness_weights.size(); ++k)
            CHECK(back.entries[i].witness_weights[k] == cs.entries[i].witness_weights[k]);
    }
    // 17 significant digits on disk
    const std::string text = dump_exact(coverage_to_json(cs));
    CHECK(text.find(format_exact(cs.entries[0].value[0])) != std::string::npos);
}

TEST_CASE("malformed coverage files are rejected with a path") {
    Json doc = coverage_to_json(make_coverage({vec({1, 2}), vec({2, 1})}));
    doc["entries"][1]["policy_id"] = 0;
    try {
        coverage_from_json(doc);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.path() == "/entries/1/policy_id");
    }
    doc = coverage_to_json(make_coverage({vec({1, 2}), vec({2, 1})}));
    doc["entries"][1]["value"] = Json::parse("[1, 2, 3]");
    CHECK_THROWS_AS(coverage_from_json(doc), ConfigError);
    doc["kind"] = "something";
    CHECK_THROWS_AS(coverage_from_json(doc), ConfigError);
}

TEST_CASE("solver calls are counted") {
    const auto before = solver_invocations();
    convex_coverage_set(make_bandit({vec({3, 0}), vec({0, 5})}), 4);
    CHECK(solver_invocations() - before == 5);
}
