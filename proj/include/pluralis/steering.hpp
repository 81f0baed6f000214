#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pluralis/coverage.hpp"
#include "pluralis/momdp.hpp"
#include "pluralis/utility.hpp"

namespace pluralis {

inline constexpr std::size_t kMaxJurySize = 10;
inline constexpr double kDefaultBeta = 5.0;
inline constexpr std::size_t kDefaultResolution = 10;

struct Stakeholder {
    std::string id;
    UtilitySpec utility;  // Linear or GGF over the environment's objectives
    Json metadata = Json::object();
};

/// Ordered stakeholder set plus the system-level aggregation of their utilities.
///
/// The aggregation is applied to the vector of member utilities. A
/// pluralistic_ggf aggregation takes its members from the jury itself; plain
/// ggf/gggf/linear/nsw aggregations consume the n member utilities directly
/// (nsw over members has no counterpart in the welfare literature this
/// follows and is offered as an extension).
class Jury {
public:
    Jury(std::vector<Stakeholder> members, UtilitySpec aggregation);

    const std::vector<Stakeholder>& members() const { return members_; }
    const UtilitySpec& aggregation() const { return aggregation_; }
    std::size_t size() const { return members_.size(); }
    std::optional<std::size_t> num_objectives() const { return members_.front().utility.dimension(); }

private:
    std::vector<Stakeholder> members_;
    UtilitySpec aggregation_;
};

struct JuryWelfare {
    double welfare = 0.0;
    std::vector<std::pair<std::string, double>> per_member;
};

JuryWelfare jury_welfare(const Jury& jury, const VectorReturn& v);

/// One objective per stakeholder: objective i's reward is u_i applied to the
/// base reward. Only linear members are accepted, since only they commute
/// with the discounted sum.
Momdp jury_to_objectives(const Jury& jury, const Momdp& base);

Jury jury_from_json(const Json& doc, const std::string& path = "");
Json jury_to_json(const Jury& jury);

enum class FeedbackKind { Approve, Disapprove };

struct FeedbackEvent {
    FeedbackKind kind = FeedbackKind::Approve;
    std::size_t step_index = 0;
    std::uint64_t context = 0;  // executing policy id
};

std::string to_string(FeedbackKind kind);
FeedbackKind feedback_kind_from_string(const std::string& s);

/// Discrete posterior over linear preference weights on a simplex grid.
struct PreferenceModel {
    std::vector<WeightVector> support;
    Eigen::VectorXd posterior;
    double beta = kDefaultBeta;

    Eigen::VectorXd mean() const;
};

PreferenceModel init_preference_model(std::size_t resolution, std::size_t d, double beta);

/// P(Approve | w) for executing `executed` under candidate weights w.
///
/// With u_w the linear utility, the utility gap to the best entry of the
/// coverage set is normalised by the spread of u_w over the set, giving
/// g in [-1, 0]. The likelihood is sigmoid(beta * g): 1/2 for a w-optimal
/// policy, falling to sigmoid(-beta) for the w-worst one. A candidate for
/// which every entry is equally good gets 1/2 (uninformative).
double approve_likelihood(const WeightVector& w, const CoverageSet& cs, const VectorReturn& executed, double beta);

/// Bayesian update on one feedback event; the input model is left untouched.
PreferenceModel update_preference_model(const PreferenceModel& model, const CoverageSet& cs,
                                        const FeedbackEvent& event);

/// Linear selection at the renormalised posterior-mean weights.
SelectionResult reselect_policy(const PreferenceModel& model, const CoverageSet& cs);

/// As above, skipping the entries in `rejected` unless every entry is in it.
/// The ranking still lists every entry.
SelectionResult reselect_policy(const PreferenceModel& model, const CoverageSet& cs,
                                const std::set<std::uint64_t>& rejected);

struct SessionConfig {
    std::uint64_t seed = 0;
    double beta = kDefaultBeta;
    std::size_t resolution = kDefaultResolution;
    std::optional<Jury> jury;
};

struct FeedbackOutcome {
    bool apology = false;
    bool switched = false;
    std::uint64_t policy_id = 0;
};

/// Live steering state for one user. Besides the posterior it tracks which
/// policy is executing and where the agent stands in the environment. Every mutation
/// is appended to the event log, and replaying that log rebuilds the session.
///
/// Sessions hold references to the model and coverage set, which must outlive
/// them. A session is not internally synchronised.
class SteeringSession {
public:
    /// Throws FingerprintMismatch when `cs` was not built from `momdp`.
    SteeringSession(const Momdp& momdp, const CoverageSet& cs, SessionConfig config);

    /// Direct steering: select with an explicit utility until the next disapproval.
    SelectionResult set_preferences(const UtilitySpec& spec);

    /// Updates the posterior; a disapproval also apologises and reselects.
    ///
    /// The posterior mean alone can keep pointing at a policy the user has
    /// just turned down (two disapproved neighbours push mass to both flanks
    /// and the mean lands back between them). Policies disapproved since the
    /// last approval are therefore skipped when reselecting.
    FeedbackOutcome feedback(FeedbackKind kind);

    /// Executes `count` environment steps with the current policy.
    void step(std::size_t count = 1);

    std::uint64_t policy_id() const { return selection_.policy_id; }
    const SelectionResult& selection() const { return selection_; }
    const PreferenceModel& model() const { return model_; }
    std::size_t step_count() const { return steps_; }
    std::size_t current_state() const { return state_; }
    std::size_t switches() const { return switches_; }
    std::size_t apologies() const { return apologies_; }
    bool episode_done() const;
    const std::vector<Json>& log() const { return log_; }
    const SessionConfig& config() const { return config_; }

    std::optional<JuryWelfare> welfare() const;

    /// {step, grid_view, policy_id, posterior_summary, per_stakeholder_utilities, welfare, ...}
    Json state() const;

    static SteeringSession replay(const Momdp& momdp, const CoverageSet& cs, const std::vector<Json>& log);

private:
    void adopt(const SelectionResult& selection, const char* reason);
    std::size_t snapshot_posterior();

    const Momdp* momdp_;
    const CoverageSet* cs_;
    SessionConfig config_;
    PreferenceModel model_;
    SelectionResult selection_;
    Rng env_rng_;
    std::size_t state_ = 0;
    std::size_t episode_step_ = 0;
    std::size_t episode_ = 0;
    std::size_t steps_ = 0;
    std::size_t switches_ = 0;
    std::size_t apologies_ = 0;
    std::size_t snapshots_ = 0;
    std::set<std::uint64_t> rejected_;
    std::vector<Json> log_;
};

struct SummaryRow {
    std::size_t step = 0;
    std::uint64_t policy_id = 0;
    double welfare = 0.0;
    std::vector<double> per_member;
};

struct SessionLog {
    std::vector<Json> records;
    std::vector<SummaryRow> summary;
    std::vector<std::string> member_ids;
    std::size_t switches = 0;
    std::size_t apologies = 0;
    std::uint64_t final_policy = 0;

    std::string to_jsonl() const;
    std::string summary_csv() const;
};

struct SteeringOptions {
    double beta = kDefaultBeta;
    std::size_t resolution = kDefaultResolution;
    /// When set the simulated user never errs; otherwise each reaction is
    /// flipped with probability 1 / (1 + e^beta).
    bool noiseless = false;
    std::optional<Jury> jury;
    /// (step, weights): the user changes their mind and steers directly.
    std::vector<std::pair<std::size_t, WeightVector>> preference_changes;
};

/// Closed loop against a simulated user with linear weights `true_user`:
/// every step the agent acts and the user approves iff the executing policy is
/// their optimum. A disapproval makes the agent apologise before it updates
/// the posterior and reselects.
SessionLog steering_session(const Momdp& momdp, const CoverageSet& cs, const WeightVector& true_user,
                            std::size_t steps, std::uint64_t seed, const SteeringOptions& options = {});

}  // namespace pluralis
