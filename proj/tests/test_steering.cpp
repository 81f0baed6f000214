#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pluralis/error.hpp"
#include "pluralis/steering.hpp"
#include "test_support.hpp"

using namespace pluralis;
using namespace pluralis::testing;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Stakeholder linear_member(std::string id, std::initializer_list<double> w) {
    return {std::move(id), UtilitySpec::linear(WeightVector(vec(w))), Json::object()};
}

std::uint64_t id_of(const CoverageSet& cs, const VectorReturn& v) {
    for (const auto& e : cs.entries)
        if (e.value == v) return e.policy.id;
    FAIL("value not in coverage set");
    return 0;
}

std::uint64_t true_optimum(const CoverageSet& cs, const WeightVector& w) {
    return select_policy(cs, UtilitySpec::linear(w)).policy_id;
}

}  // namespace

TEST_CASE("jury construction") {
    CHECK_THROWS_AS(Jury({}, UtilitySpec::make_nsw()), InvalidArgument);
    CHECK_THROWS_AS(Jury({linear_member("a", {1, 0}), linear_member("a", {0, 1})}, UtilitySpec::make_ggf(vec({0.5, 0.5}))),
                    InvalidArgument);
    CHECK_THROWS_AS(Jury({{"a", UtilitySpec::make_nsw(), {}}}, UtilitySpec::make_ggf(vec({1}))), InvalidArgument);
    CHECK_THROWS_AS(Jury({linear_member("a", {1, 0}), linear_member("b", {0, 1})}, UtilitySpec::make_ggf(vec({0.4, 0.3, 0.3}))),
                    InvalidArgument);
    std::vector<Stakeholder> eleven;
    for (int i = 0; i < 11; ++i) eleven.push_back(linear_member("m" + std::to_string(i), {1, 0}));
    CHECK_THROWS_AS(Jury(eleven, UtilitySpec::make_nsw()), InvalidArgument);
}

TEST_CASE("jury_to_objectives") {
    SUBCASE("per-stakeholder rewards") {
        const Momdp base = make_bandit({vec({2, 4})});
        const Jury jury({linear_member("even", {0.5, 0.5}), linear_member("first", {1, 0})},
                        UtilitySpec::make_ggf(vec({0.5, 0.5})));
        const Momdp m = jury_to_objectives(jury, base);
        CHECK(m.num_objectives() == 2);
        CHECK(m.objective_labels() == std::vector<std::string>{"even", "first"});
        CHECK(m.outcomes(0, 0)[0].reward == vec({3.0, 2.0}));
    }
    SUBCASE("projections leave the rewards untouched") {
        const Momdp base = random_deterministic_momdp(11, 4, 2, 2, 4);
        const Jury jury({linear_member("x", {1, 0}), linear_member("y", {0, 1})}, UtilitySpec::make_ggf(vec({0.5, 0.5})));
        const Momdp m = jury_to_objectives(jury, base);
        for (std::size_t s = 0; s < base.num_states(); ++s)
            for (std::size_t a = 0; a < base.num_actions(s); ++a)
                CHECK(m.outcomes(s, a)[0].reward == base.outcomes(s, a)[0].reward);
    }
    SUBCASE("values commute with the member utilities") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng rng(seed + 100);
            const Momdp base = random_momdp(seed, RandomSizes{4, 2, 3, 4, 0.9});
            std::vector<Stakeholder> members;
            for (int i = 0; i < 3; ++i) {
                Eigen::VectorXd w(3);
                for (Eigen::Index k = 0; k < 3; ++k) w[k] = rng.uniform();
                members.push_back({"m" + std::to_string(i), UtilitySpec::linear(WeightVector::normalized(w)), {}});
            }
            const Jury jury(members, UtilitySpec::make_ggf(vec({0.5, 0.3, 0.2})));
            const Momdp m = jury_to_objectives(jury, base);
            for (const Policy& p : enumerate_policies(base)) {
                const VectorReturn vb = policy_value(base, p);
                const VectorReturn vj = policy_value(m, p);
                for (std::size_t i = 0; i < 3; ++i)
                    CHECK(std::abs(vj[static_cast<Eigen::Index>(i)] - evaluate(members[i].utility, vb)) <= 1e-9);
            }
        }
    }
    SUBCASE("non-linear members are rejected") {
        const Jury jury({linear_member("a", {1, 0}), {"b", UtilitySpec::make_ggf(vec({0.6, 0.4})), {}}},
                        UtilitySpec::make_ggf(vec({0.5, 0.5})));
        CHECK_THROWS_AS(jury_to_objectives(jury, make_bandit({vec({1, 2})})), InvalidArgument);
    }
}

TEST_CASE("jury_welfare") {
    const auto projections = [] {
        return std::vector<Stakeholder>{linear_member("a", {1, 0}), linear_member("b", {0, 1})};
    };
    SUBCASE("projection members") {
        const auto members = projections();
        std::vector<UtilitySpec> specs{members[0].utility, members[1].utility};
        const Jury jury(members, UtilitySpec::pluralistic_ggf(vec({0.7, 0.3}), specs));
        const auto w = jury_welfare(jury, vec({3, 1}));
        CHECK(w.per_member == std::vector<std::pair<std::string, double>>{{"a", 3.0}, {"b", 1.0}});
        CHECK(w.welfare == ggf(vec({0.7, 0.3}), vec({3, 1})));
        const Jury plain(projections(), UtilitySpec::make_ggf(vec({0.7, 0.3})));
        CHECK(jury_welfare(plain, vec({3, 1})).welfare == w.welfare);
    }
    SUBCASE("identical members") {
        const Jury jury({linear_member("a", {0.3, 0.7}), linear_member("b", {0.3, 0.7}), linear_member("c", {0.3, 0.7})},
                        UtilitySpec::make_ggf(vec({0.6, 0.3, 0.1})));
        const VectorReturn v = vec({2, 5});
        CHECK(std::abs(jury_welfare(jury, v).welfare - (0.3 * 2 + 0.7 * 5)) <= 1e-12);
    }
    SUBCASE("shipped jury file") {
        const Jury jury = jury_from_json(read_json_file(data_path("jury.json")));
        CHECK(jury.size() == 3);
        const auto w = jury_welfare(jury, vec({4, 2}));
        // farmer 3.6, conservationist 2.2, resident 0.6*2 + 0.4*4 = 2.8; sorted 2.2, 2.8, 3.6
        CHECK(w.per_member[2].second == doctest::Approx(2.8));
        CHECK(w.welfare == doctest::Approx(0.5 * 2.2 + 0.3 * 2.8 + 0.2 * 3.6));
        const Jury back = jury_from_json(jury_to_json(jury));
        CHECK(jury_welfare(back, vec({4, 2})).welfare == w.welfare);
    }
    SUBCASE("malformed jury JSON") {
        try {
            jury_from_json(Json::parse(R"({"members": [{"id": "a", "utility": {"variant": "linear", "weights": [2, 0]}}],
                                           "aggregation": {"variant": "ggf", "weights": [1]}})"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.path() == "/members/0/utility/weights");
        }
        CHECK_THROWS_AS(jury_from_json(Json::parse(R"({"members": []})")), ConfigError);
    }
}

TEST_CASE("init_preference_model") {
    const auto m = init_preference_model(2, 2, 5.0);
    REQUIRE(m.support.size() == 3);
    CHECK(m.support[0].values() == vec({0, 1}));
    CHECK(m.support[1].values() == vec({0.5, 0.5}));
    CHECK(m.support[2].values() == vec({1, 0}));
    for (int i = 0; i < 3; ++i) CHECK(m.posterior[i] == doctest::Approx(1.0 / 3.0));
    const auto corners = init_preference_model(1, 3, 5.0);
    CHECK(corners.support.size() == 3);
    CHECK(std::abs(init_preference_model(10, 4, 1.0).posterior.sum() - 1.0) <= 1e-9);
    CHECK_THROWS_AS(init_preference_model(2, 2, 0.0), InvalidArgument);
    CHECK_THROWS_AS(init_preference_model(200, 5, 1.0), GuardExceeded);
}

TEST_CASE("update_preference_model") {
    const CoverageSet cs = make_coverage({vec({3, 0}), vec({0, 5})});
    const auto prior = init_preference_model(2, 2, 5.0);

    SUBCASE("disapproval computed by hand on the resolution-2 grid") {
        // executing (3,0): candidate (0,1) gap -5 over spread 5, (0.5,0.5) gap -1 over spread 1, (1,0) optimal
        const auto post = update_preference_model(prior, cs, {FeedbackKind::Disapprove, 0, 0});
        const double lo = 1.0 - logistic(-5.0);
        const double z = lo + lo + 0.5;
        CHECK(std::abs(post.posterior[0] - lo / z) <= 1e-12);
        CHECK(std::abs(post.posterior[1] - lo / z) <= 1e-12);
        CHECK(std::abs(post.posterior[2] - 0.5 / z) <= 1e-12);
        CHECK(post.posterior[2] < 1.0 / 3.0);
    }
    SUBCASE("approve then disapprove is proportional to L(1-L)") {
        const auto a = update_preference_model(prior, cs, {FeedbackKind::Approve, 0, 1});
        const auto ad = update_preference_model(a, cs, {FeedbackKind::Disapprove, 1, 1});
        const auto da = update_preference_model(update_preference_model(prior, cs, {FeedbackKind::Disapprove, 0, 1}), cs,
                                                {FeedbackKind::Approve, 1, 1});
        Eigen::VectorXd expected(3);
        for (int i = 0; i < 3; ++i) {
            const double l = approve_likelihood(prior.support[static_cast<std::size_t>(i)], cs, vec({0, 5}), 5.0);
            expected[i] = l * (1.0 - l);
        }
        expected /= expected.sum();
        CHECK((ad.posterior - expected).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((da.posterior - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("posterior validity and input immutability") {
        const CoverageSet three = make_coverage({vec({3, 0}), vec({0, 5}), vec({2, 2})});
        Rng rng(3);
        auto model = init_preference_model(10, 2, 5.0);
        for (int i = 0; i < 200; ++i) {
            const auto before = model;
            const FeedbackEvent e{rng.uniform() < 0.5 ? FeedbackKind::Approve : FeedbackKind::Disapprove,
                                  static_cast<std::size_t>(i), rng.next_u64() % 3};
            const auto next = update_preference_model(model, three, e);
            CHECK(model.posterior == before.posterior);
            CHECK(std::abs(next.posterior.sum() - 1.0) <= 1e-9);
            CHECK(next.posterior.minCoeff() >= 0.0);
            model = next;
        }
    }
    SUBCASE("unknown context") {
        CHECK_THROWS_AS(update_preference_model(prior, cs, {FeedbackKind::Approve, 0, 7}), NotFound);
    }
    SUBCASE("uninformative when every entry is equally good") {
        CHECK(approve_likelihood(WeightVector(vec({0.5, 0.5})), make_coverage({vec({1, 3}), vec({3, 1})}), vec({1, 3}), 5.0) ==
              0.5);
    }
}

TEST_CASE("reselect_policy") {
    SUBCASE("symmetric tie goes to the lowest id") {
        const auto r = reselect_policy(init_preference_model(2, 2, 5.0), make_coverage({vec({3, 0}), vec({0, 3})}));
        CHECK(r.policy_id == 0);
        CHECK(r.utility == doctest::Approx(1.5));
    }
    SUBCASE("degenerate posterior") {
        auto m = init_preference_model(2, 2, 5.0);
        m.posterior << 0, 0, 1;
        CHECK(reselect_policy(m, make_coverage({vec({0, 5}), vec({2, 2}), vec({3, 0})})).policy_id == 2);
    }
    SUBCASE("twenty noiseless reactions find the true optimum") {
        const CoverageSet cs = make_coverage({vec({3, 0}), vec({0, 5}), vec({2, 2})});
        const WeightVector user(vec({0.8, 0.2}));
        const auto optimum = true_optimum(cs, user);
        CHECK(optimum == 0);
        auto model = init_preference_model(10, 2, 5.0);
        auto current = reselect_policy(model, cs).policy_id;
        for (std::size_t t = 0; t < 20; ++t) {
            const auto kind = current == optimum ? FeedbackKind::Approve : FeedbackKind::Disapprove;
            model = update_preference_model(model, cs, {kind, t, current});
            current = reselect_policy(model, cs).policy_id;
        }
        CHECK(current == optimum);
    }
    SUBCASE("no solver calls") {
        const CoverageSet cs = make_coverage({vec({3, 0}), vec({0, 5}), vec({2, 2})});
        const auto before = solver_invocations();
        auto model = init_preference_model(10, 2, 5.0);
        for (std::size_t t = 0; t < 50; ++t) {
            model = update_preference_model(model, cs, {FeedbackKind::Disapprove, t, t % 3});
            reselect_policy(model, cs);
        }
        CHECK(solver_invocations() == before);
    }
}

TEST_CASE("steering session") {
    const Momdp two = make_bandit({vec({3, 0}), vec({0, 5})});
    const CoverageSet two_cs = convex_coverage_set(two, 10);
    REQUIRE(two_cs.entries.size() == 2);
    SteeringOptions noiseless;
    noiseless.noiseless = true;

    SUBCASE("aligned user never switches") {
        const Momdp bandit = load_momdp_file(data_path("bandit3.json"));
        const CoverageSet cs = convex_coverage_set(bandit, 10);
        const SteeringSession probe(bandit, cs, SessionConfig{});
        const auto& entry = cs.entry(probe.policy_id());
        // pick a witness for which the initial entry is the unique optimum
        std::optional<WeightVector> aligned;
        for (const auto& w : entry.witness_weights) {
            const auto r = select_policy(cs, UtilitySpec::linear(w));
            if (r.ranking.size() == 1 || r.ranking[0].second > r.ranking[1].second) aligned = w;
        }
        REQUIRE(aligned);
        const auto log = steering_session(bandit, cs, *aligned, 100, 1, noiseless);
        CHECK(log.switches == 0);
        CHECK(log.apologies == 0);
        const auto noisy = steering_session(bandit, cs, *aligned, 30, 1);
        CHECK(noisy.final_policy == probe.policy_id());
    }
    SUBCASE("wrong initial policy switches exactly once") {
        SteeringOptions opts = noiseless;
        opts.resolution = 2;
        // uniform prior at resolution 2 picks (0,5); the user wants (3,0)
        const WeightVector user(vec({1, 0}));
        const SteeringSession probe(two, two_cs, SessionConfig{0, 5.0, 2, std::nullopt});
        CHECK(probe.policy_id() == id_of(two_cs, vec({0, 5})));
        const auto log = steering_session(two, two_cs, user, 50, 3, opts);
        CHECK(log.switches == 1);
        CHECK(log.final_policy == id_of(two_cs, vec({3, 0})));
        // stable: every step after the switch executes the optimum
        bool switched = false;
        for (const auto& row : log.summary) {
            if (row.policy_id == log.final_policy) switched = true;
            else CHECK_FALSE(switched);
        }
    }
    SUBCASE("deterministic logs") {
        const auto a = steering_session(two, two_cs, WeightVector(vec({0.9, 0.1})), 200, 42);
        const auto b = steering_session(two, two_cs, WeightVector(vec({0.9, 0.1})), 200, 42);
        CHECK(a.to_jsonl() == b.to_jsonl());
        CHECK(a.summary_csv() == b.summary_csv());
        const auto c = steering_session(two, two_cs, WeightVector(vec({0.9, 0.1})), 200, 43);
        CHECK(a.to_jsonl() != c.to_jsonl());
    }
    SUBCASE("every step emits feedback and disapprovals apologise") {
        const auto log = steering_session(two, two_cs, WeightVector(vec({0.9, 0.1})), 40, 5);
        std::size_t steps = 0, feedback = 0, apologies = 0, disapprovals = 0;
        for (const auto& r : log.records) {
            const auto type = r.at("type").get<std::string>();
            steps += type == "step";
            feedback += type == "feedback";
            apologies += type == "apology";
            disapprovals += type == "feedback" && r.at("kind") == "disapprove";
        }
        CHECK(steps == 40);
        CHECK(feedback == 40);
        CHECK(apologies == disapprovals);
        CHECK(apologies == log.apologies);
        CHECK(log.summary.size() == 40);
    }
    SUBCASE("replay rebuilds the session") {
        const Momdp grid = load_momdp_file(data_path("treasure_grid.json"));
        const CoverageSet cs = convex_coverage_set(grid, 10);
        SteeringSession live(grid, cs, SessionConfig{9, 5.0, 10, std::nullopt});
        live.step(7);
        live.feedback(FeedbackKind::Disapprove);
        live.set_preferences(UtilitySpec::make_ggf(vec({0.6, 0.4})));
        live.step(12);
        live.feedback(FeedbackKind::Approve);
        live.step(3);
        const SteeringSession copy = SteeringSession::replay(grid, cs, live.log());
        CHECK(dump_exact(copy.state()) == dump_exact(live.state()));
        CHECK(copy.log().size() == live.log().size());
        CHECK_THROWS_AS(SteeringSession::replay(grid, cs, {}), ConfigError);
    }
    SUBCASE("explicit preferences hold until the next disapproval") {
        SteeringSession s(two, two_cs, SessionConfig{0, 5.0, 10, std::nullopt});
        s.set_preferences(UtilitySpec::linear(WeightVector(vec({1, 0}))));
        CHECK(s.policy_id() == id_of(two_cs, vec({3, 0})));
        s.feedback(FeedbackKind::Approve);
        CHECK(s.policy_id() == id_of(two_cs, vec({3, 0})));
        CHECK_THROWS_AS(s.set_preferences(UtilitySpec::make_ggf(vec({0.5, 0.3, 0.2}))), DimensionMismatch);
    }
    SUBCASE("fingerprint mismatch") {
        const Momdp other = make_bandit({vec({3, 0}), vec({0, 6})});
        CHECK_THROWS_AS(steering_session(other, two_cs, WeightVector(vec({1, 0})), 5, 0), FingerprintMismatch);
    }
    SUBCASE("jury welfare in the summary") {
        SteeringOptions opts;
        opts.jury = jury_from_json(read_json_file(data_path("jury.json")));
        const auto log = steering_session(two, two_cs, WeightVector(vec({0.5, 0.5})), 5, 1, opts);
        CHECK(log.member_ids == std::vector<std::string>{"farmer", "conservationist", "resident"});
        const auto csv = log.summary_csv();
        CHECK(csv.rfind("step,executing_policy,welfare,farmer,conservationist,resident\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    }
    SUBCASE("preference changes steer without solver calls") {
        SteeringOptions opts;
        for (std::size_t k = 0; k < 10; ++k)
            opts.preference_changes.emplace_back(k * 10, WeightVector(k % 2 ? vec({1, 0}) : vec({0, 1})));
        const auto before = solver_invocations();
        const auto log = steering_session(two, two_cs, WeightVector(vec({0.5, 0.5})), 100, 1, opts);
        CHECK(solver_invocations() == before);
        CHECK(log.summary[95].policy_id == id_of(two_cs, vec({3, 0})));
    }
}

TEST_CASE("noiseless convergence within |cs| - 1 switches") {
    SteeringOptions opts;
    opts.noiseless = true;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        // values on a concave arc are all supported, so each is some linear optimum
        const std::size_t n = 2 + seed % 4;
        std::vector<VectorReturn> arms;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = (static_cast<double>(i) + rng.uniform(0.1, 0.9)) / static_cast<double>(n) * 1.5707963;
            arms.push_back(vec({std::cos(t), std::sin(t)}));
        }
        const Momdp m = make_bandit(arms);
        const CoverageSet cs = convex_coverage_set(m, 40);
        const WeightVector user = WeightVector::normalized(vec({rng.uniform(), rng.uniform()}));
        const auto r = select_policy(cs, UtilitySpec::linear(user));
        if (r.ranking.size() > 1 && r.ranking[0].second - r.ranking[1].second < 1e-9) continue;
        const auto log = steering_session(m, cs, user, 200, seed, opts);
        CAPTURE(seed);
        CHECK(log.final_policy == r.policy_id);
        CHECK(log.switches <= cs.entries.size() - 1);
        bool locked = false;
        for (const auto& row : log.summary) {
            if (row.policy_id == r.policy_id) locked = true;
            else CHECK_FALSE(locked);
        }
    }
}
