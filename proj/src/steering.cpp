#include "pluralis/steering.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "pluralis/error.hpp"

namespace pluralis {
namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Json posterior_record(std::size_t snapshot, const PreferenceModel& model) {
    return {{"type", "posterior"}, {"snapshot", snapshot}, {"posterior", to_std(model.posterior)}};
}

}  // namespace

// --- jury -------------------------------------------------------------------

Jury::Jury(std::vector<Stakeholder> members, UtilitySpec aggregation)
    : members_(std::move(members)), aggregation_(std::move(aggregation)) {
    if (members_.empty() || members_.size() > kMaxJurySize)
        throw InvalidArgument("jury size must be in 1..10, got " + std::to_string(members_.size()));
    std::set<std::string> ids;
    std::optional<std::size_t> d;
    for (const auto& m : members_) {
        if (!ids.insert(m.id).second) throw InvalidArgument("duplicate stakeholder id '" + m.id + "'");
        if (!std::holds_alternative<LinearUtility>(m.utility.variant) &&
            !std::holds_alternative<GgfUtility>(m.utility.variant))
            throw InvalidArgument("stakeholder '" + m.id + "' must have a linear or ggf utility");
        if (d && m.utility.dimension() != d)
            throw InvalidArgument("stakeholder '" + m.id + "' disagrees on the number of objectives");
        d = m.utility.dimension();
    }
    if (std::holds_alternative<PluralisticGgfUtility>(aggregation_.variant)) {
        const auto& agg = std::get<PluralisticGgfUtility>(aggregation_.variant);
        if (static_cast<std::size_t>(agg.weights.size()) != members_.size())
            throw InvalidArgument("aggregation has " + std::to_string(agg.weights.size()) + " weights for " +
                                  std::to_string(members_.size()) + " stakeholders");
    } else if (const auto ad = aggregation_.dimension(); ad && *ad != members_.size()) {
        throw InvalidArgument("aggregation expects " + std::to_string(*ad) + " utilities, jury has " +
                              std::to_string(members_.size()) + " stakeholders");
    }
}

JuryWelfare jury_welfare(const Jury& jury, const VectorReturn& v) {
    JuryWelfare out;
    Eigen::VectorXd u(static_cast<Eigen::Index>(jury.size()));
    for (std::size_t i = 0; i < jury.size(); ++i) {
        const auto& m = jury.members()[i];
        try {
            u[static_cast<Eigen::Index>(i)] = evaluate(m.utility, v);
        } catch (const DomainError& e) {
            throw DomainError("stakeholder '" + m.id + "': " + e.what());
        } catch (const Error& e) {
            throw InvalidArgument("stakeholder '" + m.id + "': " + e.what());
        }
        out.per_member.emplace_back(m.id, u[static_cast<Eigen::Index>(i)]);
    }
    if (const auto* agg = std::get_if<PluralisticGgfUtility>(&jury.aggregation().variant)) {
        out.welfare = ggf(agg->weights, u);
    } else {
        out.welfare = evaluate(jury.aggregation(), u);
    }
    return out;
}

Momdp jury_to_objectives(const Jury& jury, const Momdp& base) {
    std::vector<Eigen::VectorXd> weights;
    for (const auto& m : jury.members()) {
        const auto* lin = std::get_if<LinearUtility>(&m.utility.variant);
        if (!lin)
            throw InvalidArgument("stakeholder '" + m.id +
                                  "' has a non-linear utility, which does not distribute over the discounted return");
        if (lin->weights.size() != base.num_objectives())
            throw DimensionMismatch(base.num_objectives(), lin->weights.size());
        weights.push_back(lin->weights.values());
    }
    Momdp::Tables t = base.tables();
    const auto n = static_cast<Eigen::Index>(jury.size());
    t.num_objectives = jury.size();
    t.objective_labels.clear();
    for (const auto& m : jury.members()) t.objective_labels.push_back(m.id);
    for (auto& row_s : t.rows)
        for (auto& row : row_s)
            for (auto& o : row) {
                VectorReturn r(n);
                for (Eigen::Index i = 0; i < n; ++i) r[i] = linear_utility(weights[static_cast<std::size_t>(i)], o.reward);
                o.reward = std::move(r);
            }
    return Momdp(std::move(t));
}

Jury jury_from_json(const Json& doc, const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "jury must be a JSON object");
    auto mit = doc.find("members");
    if (mit == doc.end() || !mit->is_array() || mit->empty())
        throw ConfigError(path + "/members", "expected a nonempty array of stakeholders");
    std::vector<Stakeholder> members;
    for (std::size_t i = 0; i < mit->size(); ++i) {
        const std::string mp = path + "/members/" + std::to_string(i);
        const Json& m = (*mit)[i];
        if (!m.is_object() || !m.contains("id") || !m["id"].is_string())
            throw ConfigError(mp + "/id", "required string field missing");
        if (!m.contains("utility")) throw ConfigError(mp + "/utility", "required field missing");
        Stakeholder sh{m["id"].get<std::string>(), utility_from_json(m["utility"], mp + "/utility"),
                       m.value("metadata", Json::object())};
        members.push_back(std::move(sh));
    }
    auto ait = doc.find("aggregation");
    if (ait == doc.end()) throw ConfigError(path + "/aggregation", "required field missing");
    const std::string ap = path + "/aggregation";
    try {
        if (ait->is_object() && ait->value("variant", "") == "pluralistic_ggf") {
            if (ait->contains("members"))
                throw ConfigError(ap + "/members", "pluralistic_ggf aggregation takes its members from the jury");
            std::vector<double> w;
            try {
                w = ait->at("weights").get<std::vector<double>>();
            } catch (const Json::exception&) {
                throw ConfigError(ap + "/weights", "expected an array of numbers");
            }
            std::vector<UtilitySpec> member_specs;
            for (const auto& m : members) member_specs.push_back(m.utility);
            auto agg = UtilitySpec::pluralistic_ggf(
                Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                std::move(member_specs), ait->value("label", ""));
            return Jury(std::move(members), std::move(agg));
        }
        return Jury(std::move(members), utility_from_json(*ait, ap));
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
}

Json jury_to_json(const Jury& jury) {
    Json members = Json::array();
    for (const auto& m : jury.members())
        members.push_back({{"id", m.id}, {"utility", utility_to_json(m.utility)}, {"metadata", m.metadata}});
    Json agg = utility_to_json(jury.aggregation());
    agg.erase("members");
    return {{"members", std::move(members)}, {"aggregation", std::move(agg)}};
}

// --- preference model ---------------------------------------------------------

std::string to_string(FeedbackKind kind) { return kind == FeedbackKind::Approve ? "approve" : "disapprove"; }

FeedbackKind feedback_kind_from_string(const std::string& s) {
    if (s == "approve") return FeedbackKind::Approve;
    if (s == "disapprove") return FeedbackKind::Disapprove;
    throw InvalidArgument("feedback kind must be \"approve\" or \"disapprove\", got '" + s + "'");
}

Eigen::VectorXd PreferenceModel::mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(support.front().values().size());
    for (std::size_t i = 0; i < support.size(); ++i) m += posterior[static_cast<Eigen::Index>(i)] * support[i].values();
    return m;
}

PreferenceModel init_preference_model(std::size_t resolution, std::size_t d, double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
    PreferenceModel model;
    model.support = simplex_grid(resolution, d);
    model.posterior = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(model.support.size()),
                                                1.0 / static_cast<double>(model.support.size()));
    model.beta = beta;
    return model;
}

double approve_likelihood(const WeightVector& w, const CoverageSet& cs, const VectorReturn& executed, double beta) {
    double best = -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& e : cs.entries) {
        const double u = linear_utility(w.values(), e.value);
        best = std::max(best, u);
        worst = std::min(worst, u);
    }
    const double spread = best - worst;
    if (!(spread > 0.0)) return 0.5;
    const double gap = std::min(0.0, (linear_utility(w.values(), executed) - best) / spread);
    return sigmoid(beta * gap);
}

PreferenceModel update_preference_model(const PreferenceModel& model, const CoverageSet& cs,
                                        const FeedbackEvent& event) {
    const VectorReturn& executed = cs.entry(event.context).value;
    PreferenceModel next = model;
    for (std::size_t i = 0; i < next.support.size(); ++i) {
        const double approve = approve_likelihood(next.support[i], cs, executed, next.beta);
        next.posterior[static_cast<Eigen::Index>(i)] *= event.kind == FeedbackKind::Approve ? approve : 1.0 - approve;
    }
    const double total = next.posterior.sum();
    if (!(total > 0.0) || !std::isfinite(total)) return model;  // underflow: keep the previous belief
    next.posterior /= total;
    return next;
}

SelectionResult reselect_policy(const PreferenceModel& model, const CoverageSet& cs) {
    return select_policy(cs, UtilitySpec::linear(WeightVector::normalized(model.mean()), "posterior_mean"));
}

SelectionResult reselect_policy(const PreferenceModel& model, const CoverageSet& cs,
                                const std::set<std::uint64_t>& rejected) {
    SelectionResult result = reselect_policy(model, cs);
    for (const auto& [id, u] : result.ranking) {
        if (rejected.contains(id)) continue;
        result.policy_id = id;
        result.utility = u;
        break;
    }
    return result;
}

// --- session ------------------------------------------------------------------

SteeringSession::SteeringSession(const Momdp& momdp, const CoverageSet& cs, SessionConfig config)
    : momdp_(&momdp), cs_(&cs), config_(std::move(config)), env_rng_(config_.seed) {
    if (cs.momdp_fingerprint != momdp.fingerprint())
        throw FingerprintMismatch("coverage set fingerprint " + cs.momdp_fingerprint +
                                  " does not match environment fingerprint " + momdp.fingerprint());
    if (cs.num_objectives() != momdp.num_objectives())
        throw FingerprintMismatch("coverage set has " + std::to_string(cs.num_objectives()) +
                                  " objectives, environment has " + std::to_string(momdp.num_objectives()));
    if (config_.jury && config_.jury->num_objectives() != momdp.num_objectives())
        throw InvalidArgument("jury utilities do not match the environment's objectives");
    model_ = init_preference_model(config_.resolution, momdp.num_objectives(), config_.beta);
    selection_ = reselect_policy(model_, cs);
    state_ = momdp.start_state();
    log_.push_back({{"type", "session_start"},
                    {"seed", config_.seed},
                    {"beta", config_.beta},
                    {"resolution", config_.resolution},
                    {"fingerprint", momdp.fingerprint()},
                    {"jury", config_.jury ? jury_to_json(*config_.jury) : Json(nullptr)},
                    {"policy_id", selection_.policy_id},
                    {"posterior_snapshot", snapshots_}});
    snapshot_posterior();
}

std::size_t SteeringSession::snapshot_posterior() {
    log_.push_back(posterior_record(snapshots_, model_));
    return snapshots_++;
}

void SteeringSession::adopt(const SelectionResult& selection, const char* reason) {
    const std::uint64_t from = selection_.policy_id;
    selection_ = selection;
    if (selection.policy_id != from) {
        ++switches_;
        log_.push_back({{"type", "switch"}, {"step", steps_}, {"from", from}, {"to", selection.policy_id},
                        {"reason", reason}});
    }
}

SelectionResult SteeringSession::set_preferences(const UtilitySpec& spec) {
    if (const auto d = spec.dimension(); d && *d != momdp_->num_objectives())
        throw DimensionMismatch(momdp_->num_objectives(), *d);
    const SelectionResult chosen = select_policy(*cs_, spec);
    rejected_.clear();
    log_.push_back({{"type", "preferences"}, {"step", steps_}, {"utility", utility_to_json(spec)},
                    {"policy_id", chosen.policy_id}});
    adopt(chosen, "preferences");
    return selection_;
}

FeedbackOutcome SteeringSession::feedback(FeedbackKind kind) {
    const FeedbackEvent event{kind, steps_, selection_.policy_id};
    model_ = update_preference_model(model_, *cs_, event);
    const std::size_t snapshot = snapshot_posterior();
    log_.push_back({{"type", "feedback"}, {"step", steps_}, {"kind", to_string(kind)}, {"context", event.context},
                    {"posterior_snapshot", snapshot}});
    FeedbackOutcome out;
    if (kind == FeedbackKind::Approve) rejected_.clear();
    if (kind == FeedbackKind::Disapprove) {
        out.apology = true;
        ++apologies_;
        log_.push_back({{"type", "apology"}, {"step", steps_}, {"context", event.context},
                        {"message", "Sorry - adjusting to your preferences."}});
        const std::uint64_t before = selection_.policy_id;
        rejected_.insert(before);
        if (rejected_.size() >= cs_->entries.size()) rejected_ = {before};  // all turned down: start over
        adopt(reselect_policy(model_, *cs_, rejected_), "feedback");
        out.switched = selection_.policy_id != before;
    }
    out.policy_id = selection_.policy_id;
    return out;
}

bool SteeringSession::episode_done() const {
    return momdp_->is_terminal(state_) || episode_step_ >= momdp_->horizon();
}

void SteeringSession::step(std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        bool reset = false;
        if (episode_done()) {
            state_ = momdp_->start_state();
            episode_step_ = 0;
            ++episode_;
            reset = true;
        }
        const Policy& policy = cs_->entry(selection_.policy_id).policy;
        if (momdp_->is_terminal(state_)) {
            // start state itself is terminal: nothing to execute
            log_.push_back({{"type", "step"}, {"step", steps_}, {"episode", episode_}, {"state", state_},
                            {"action", nullptr}, {"next_state", state_}, {"reward", nullptr},
                            {"policy_id", selection_.policy_id}, {"episode_reset", reset}});
            ++steps_;
            continue;
        }
        if (state_ >= policy.action_map.size() || policy.action_map[state_] >= momdp_->num_actions(state_))
            throw InvalidArgument("policy " + std::to_string(selection_.policy_id) + " has no action for state " +
                                  std::to_string(state_));
        const std::size_t action = policy.action_map[state_];
        const Outcome& o = sample_outcome(*momdp_, state_, action, env_rng_);
        log_.push_back({{"type", "step"}, {"step", steps_}, {"episode", episode_}, {"state", state_},
                        {"action", action}, {"next_state", o.next}, {"reward", to_std(o.reward)},
                        {"policy_id", selection_.policy_id}, {"episode_reset", reset}});
        state_ = o.next;
        ++episode_step_;
        ++steps_;
    }
}

std::optional<JuryWelfare> SteeringSession::welfare() const {
    if (!config_.jury) return std::nullopt;
    return jury_welfare(*config_.jury, cs_->entry(selection_.policy_id).value);
}

Json SteeringSession::state() const {
    std::vector<std::size_t> order(model_.support.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model_.posterior[static_cast<Eigen::Index>(a)] > model_.posterior[static_cast<Eigen::Index>(b)];
    });
    Json top = Json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i)
        top.push_back({{"weights", to_std(model_.support[order[i]].values())},
                       {"probability", model_.posterior[static_cast<Eigen::Index>(order[i])]}});
    double entropy = 0.0;
    for (Eigen::Index i = 0; i < model_.posterior.size(); ++i)
        if (model_.posterior[i] > 0.0) entropy -= model_.posterior[i] * std::log(model_.posterior[i]);

    const auto grid = render_grid(*momdp_, state_);
    Json per_member = Json::array();
    Json welfare_value = nullptr;
    if (const auto w = welfare()) {
        for (const auto& [id, u] : w->per_member) per_member.push_back({{"id", id}, {"utility", u}});
        welfare_value = w->welfare;
    }
    return {
        {"step", steps_},
        {"episode", episode_},
        {"state", state_},
        {"episode_done", episode_done()},
        {"grid_view", grid.empty() ? Json(nullptr) : Json(grid)},
        {"policy_id", selection_.policy_id},
        {"utility", selection_.utility},
        {"value", to_std(cs_->entry(selection_.policy_id).value)},
        {"posterior_summary", {{"mean", to_std(model_.mean())}, {"entropy", entropy}, {"top", std::move(top)}}},
        {"per_stakeholder_utilities", std::move(per_member)},
        {"welfare", welfare_value},
        {"switches", switches_},
        {"apologies", apologies_},
    };
}

SteeringSession SteeringSession::replay(const Momdp& momdp, const CoverageSet& cs, const std::vector<Json>& log) {
    if (log.empty() || log.front().value("type", "") != "session_start")
        throw ConfigError("/0", "log must begin with a session_start record");
    const Json& start = log.front();
    SessionConfig config;
    try {
        config.seed = start.at("seed").get<std::uint64_t>();
        config.beta = start.at("beta").get<double>();
        config.resolution = start.at("resolution").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw ConfigError("/0", e.what());
    }
    if (start.contains("jury") && !start["jury"].is_null()) config.jury = jury_from_json(start["jury"], "/0/jury");
    SteeringSession session(momdp, cs, std::move(config));
    for (std::size_t i = 1; i < log.size(); ++i) {
        const std::string type = log[i].value("type", "");
        if (type == "preferences") {
            session.set_preferences(utility_from_json(log[i].at("utility"), "/" + std::to_string(i) + "/utility"));
        } else if (type == "step") {
            session.step(1);
        } else if (type == "feedback") {
            session.feedback(feedback_kind_from_string(log[i].at("kind").get<std::string>()));
        }
    }
    return session;
}

// --- simulated closed loop ----------------------------------------------------

std::string SessionLog::to_jsonl() const {
    std::string out;
    for (const auto& r : records) {
        out += dump_exact(r);
        out += '\n';
    }
    return out;
}

std::string SessionLog::summary_csv() const {
    std::ostringstream out;
    out << "step,executing_policy,welfare";
    for (const auto& id : member_ids) out << ',' << id;
    out << '\n';
    for (const auto& row : summary) {
        out << row.step << ',' << row.policy_id << ',' << format_exact(row.welfare);
        for (double u : row.per_member) out << ',' << format_exact(u);
        out << '\n';
    }
    return out.str();
}

SessionLog steering_session(const Momdp& momdp, const CoverageSet& cs, const WeightVector& true_user,
                            std::size_t steps, std::uint64_t seed, const SteeringOptions& options) {
    if (true_user.size() != momdp.num_objectives()) throw DimensionMismatch(momdp.num_objectives(), true_user.size());
    SteeringSession session(momdp, cs, SessionConfig{seed, options.beta, options.resolution, options.jury});
    // distinct stream for the simulated user's noise
    Rng user_rng(seed ^ 0xA5A5A5A55A5A5A5AULL);
    const double flip = options.noiseless ? 0.0 : sigmoid(-options.beta);
    WeightVector user = true_user;

    SessionLog log;
    if (options.jury)
        for (const auto& m : options.jury->members()) log.member_ids.push_back(m.id);

    for (std::size_t t = 0; t < steps; ++t) {
        for (const auto& [at, w] : options.preference_changes) {
            if (at != t) continue;
            user = w;
            session.set_preferences(UtilitySpec::linear(w, "user"));
        }
        session.step(1);

        const std::uint64_t optimum = select_policy(cs, UtilitySpec::linear(user)).policy_id;
        bool displeased = session.policy_id() != optimum;
        if (flip > 0.0 && user_rng.uniform() < flip) displeased = !displeased;

        SummaryRow row;
        row.step = t;
        row.policy_id = session.policy_id();
        if (const auto w = session.welfare()) {
            row.welfare = w->welfare;
            for (const auto& [id, u] : w->per_member) row.per_member.push_back(u);
        } else {
            row.welfare = linear_utility(user.values(), cs.entry(session.policy_id()).value);
        }
        log.summary.push_back(std::move(row));

        session.feedback(displeased ? FeedbackKind::Disapprove : FeedbackKind::Approve);
    }
    log.records = session.log();
    log.switches = session.switches();
    log.apologies = session.apologies();
    log.final_policy = session.policy_id();
    return log;
}

}  // namespace pluralis
