#include "pluralis/utility.hpp"

#include <algorithm>

#include "pluralis/error.hpp"

namespace pluralis {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd number_array(const Json& doc, const std::string& key, const std::string& path) {
    const std::string p = path + "/" + key;
    auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError(p, "required field missing");
    if (!it->is_array() || it->empty()) throw ConfigError(p, "expected a nonempty array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(it->size()));
    for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_number()) throw ConfigError(p + "/" + std::to_string(i), "expected a number");
        out[static_cast<Eigen::Index>(i)] = (*it)[i].get<double>();
    }
    return out;
}

}  // namespace

UtilitySpec UtilitySpec::linear(WeightVector w, std::string label) {
    return {LinearUtility{std::move(w)}, std::move(label)};
}

UtilitySpec UtilitySpec::make_ggf(Eigen::VectorXd w, std::string label) {
    validate_ggf_weights(w);
    return {GgfUtility{std::move(w)}, std::move(label)};
}

UtilitySpec UtilitySpec::make_gggf(Eigen::VectorXd w, Eigen::VectorXd priorities, std::string label) {
    validate_ggf_weights(w);
    if (priorities.size() != w.size())
        throw InvalidArgument("GGGF needs one priority per weight (" + std::to_string(w.size()) + ")");
    for (Eigen::Index i = 0; i < priorities.size(); ++i)
        if (!(priorities[i] > 0.0) || !std::isfinite(priorities[i]))
            throw InvalidArgument("GGGF priority " + std::to_string(i) + " must be strictly positive");
    return {GggfUtility{std::move(w), std::move(priorities)}, std::move(label)};
}

UtilitySpec UtilitySpec::make_nsw(std::string label) { return {NswUtility{}, std::move(label)}; }

UtilitySpec UtilitySpec::pluralistic_ggf(Eigen::VectorXd w, std::vector<UtilitySpec> members, std::string label) {
    validate_ggf_weights(w);
    if (members.size() != static_cast<std::size_t>(w.size()))
        throw InvalidArgument("pluralistic GGF has " + std::to_string(members.size()) + " members but " +
                              std::to_string(w.size()) + " outer weights");
    std::optional<std::size_t> d;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& m = members[i];
        if (!std::holds_alternative<LinearUtility>(m.variant) && !std::holds_alternative<GgfUtility>(m.variant))
            throw InvalidArgument("pluralistic GGF member " + std::to_string(i) + " must be linear or ggf, got " +
                                  m.variant_name());
        const auto md = m.dimension();
        if (d && md != d) throw InvalidArgument("pluralistic GGF members disagree on the number of objectives");
        d = md;
    }
    return {PluralisticGgfUtility{std::move(w), std::move(members)}, std::move(label)};
}

std::optional<std::size_t> UtilitySpec::dimension() const {
    return std::visit(overloaded{
                          [](const LinearUtility& u) -> std::optional<std::size_t> { return u.weights.size(); },
                          [](const GgfUtility& u) -> std::optional<std::size_t> {
                              return static_cast<std::size_t>(u.weights.size());
                          },
                          [](const GggfUtility& u) -> std::optional<std::size_t> {
                              return static_cast<std::size_t>(u.weights.size());
                          },
                          [](const NswUtility&) -> std::optional<std::size_t> { return std::nullopt; },
                          [](const PluralisticGgfUtility& u) -> std::optional<std::size_t> {
                              return u.members.front().dimension();
                          },
                      },
                      variant);
}

std::string UtilitySpec::variant_name() const {
    return std::visit(overloaded{
                          [](const LinearUtility&) { return std::string("linear"); },
                          [](const GgfUtility&) { return std::string("ggf"); },
                          [](const GggfUtility&) { return std::string("gggf"); },
                          [](const NswUtility&) { return std::string("nsw"); },
                          [](const PluralisticGgfUtility&) { return std::string("pluralistic_ggf"); },
                      },
                      variant);
}

Eigen::VectorXd member_utilities(const PluralisticGgfUtility& spec, const VectorReturn& v) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(spec.members.size()));
    for (std::size_t i = 0; i < spec.members.size(); ++i) {
        try {
            u[static_cast<Eigen::Index>(i)] = evaluate(spec.members[i], v);
        } catch (const DomainError& e) {
            throw DomainError("member " + std::to_string(i) + ": " + e.what());
        } catch (const Error& e) {
            throw InvalidArgument("member " + std::to_string(i) + ": " + e.what());
        }
    }
    return u;
}

double pluralistic_ggf(const PluralisticGgfUtility& spec, const VectorReturn& v) {
    return ggf(spec.weights, member_utilities(spec, v));
}

double evaluate(const UtilitySpec& spec, const VectorReturn& v) {
    return std::visit(overloaded{
                          [&](const LinearUtility& u) { return linear_utility(u.weights.values(), v); },
                          [&](const GgfUtility& u) { return ggf(u.weights, v); },
                          [&](const GggfUtility& u) { return generalized_ggf(u.weights, u.priorities, v); },
                          [&](const NswUtility&) { return nsw(v); },
                          [&](const PluralisticGgfUtility& u) { return pluralistic_ggf(u, v); },
                      },
                      spec.variant);
}

SelectionResult select_policy(const CoverageSet& cs, const UtilitySpec& spec) {
    if (cs.entries.empty()) throw InvalidArgument("cannot select from an empty coverage set");
    SelectionResult result;
    result.ranking.reserve(cs.entries.size());
    for (const auto& e : cs.entries) {
        try {
            result.ranking.emplace_back(e.policy.id, evaluate(spec, e.value));
        } catch (const DomainError& ex) {
            throw DomainError("coverage entry with policy id " + std::to_string(e.policy.id) + ": " + ex.what());
        }
    }
    std::stable_sort(result.ranking.begin(), result.ranking.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    result.policy_id = result.ranking.front().first;
    result.utility = result.ranking.front().second;
    return result;
}

UtilitySpec utility_from_json(const Json& doc, const std::string& path) {
    if (!doc.is_object()) throw ConfigError(path, "utility spec must be a JSON object");
    auto vit = doc.find("variant");
    if (vit == doc.end() || !vit->is_string()) throw ConfigError(path + "/variant", "required string field missing");
    const auto variant = vit->get<std::string>();
    std::string label;
    if (auto lit = doc.find("label"); lit != doc.end()) {
        if (!lit->is_string()) throw ConfigError(path + "/label", "expected a string");
        label = lit->get<std::string>();
    }
    try {
        if (variant == "linear") {
            try {
                return UtilitySpec::linear(WeightVector(number_array(doc, "weights", path)), label);
            } catch (const InvalidArgument& e) {
                throw ConfigError(path + "/weights", e.what());
            }
        }
        if (variant == "ggf") return UtilitySpec::make_ggf(number_array(doc, "weights", path), label);
        if (variant == "gggf")
            return UtilitySpec::make_gggf(number_array(doc, "weights", path), number_array(doc, "priorities", path),
                                          label);
        if (variant == "nsw") return UtilitySpec::make_nsw(label);
        if (variant == "pluralistic_ggf") {
            auto mit = doc.find("members");
            if (mit == doc.end() || !mit->is_array() || mit->empty())
                throw ConfigError(path + "/members", "expected a nonempty array of utility specs");
            std::vector<UtilitySpec> members;
            for (std::size_t i = 0; i < mit->size(); ++i) {
                const std::string mp = path + "/members/" + std::to_string(i);
                if ((*mit)[i].value("variant", "") == "pluralistic_ggf")
                    throw ConfigError(mp + "/variant", "pluralistic_ggf members cannot be nested");
                members.push_back(utility_from_json((*mit)[i], mp));
            }
            return UtilitySpec::pluralistic_ggf(number_array(doc, "weights", path), std::move(members), label);
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path + "/variant", "unknown utility variant '" + variant + "'");
}

Json utility_to_json(const UtilitySpec& spec) {
    Json j{{"variant", spec.variant_name()}, {"label", spec.label}};
    std::visit(overloaded{
                   [&](const LinearUtility& u) { j["weights"] = to_std(u.weights.values()); },
                   [&](const GgfUtility& u) { j["weights"] = to_std(u.weights); },
                   [&](const GggfUtility& u) {
                       j["weights"] = to_std(u.weights);
                       j["priorities"] = to_std(u.priorities);
                   },
                   [&](const NswUtility&) {},
                   [&](const PluralisticGgfUtility& u) {
                       j["weights"] = to_std(u.weights);
                       j["members"] = Json::array();
                       for (const auto& m : u.members) j["members"].push_back(utility_to_json(m));
                   },
               },
               spec.variant);
    return j;
}

UtilitySpec load_utility_file(const std::filesystem::path& path) { return utility_from_json(read_json_file(path)); }

Json selection_to_json(const SelectionResult& result) {
    Json ranking = Json::array();
    for (const auto& [id, u] : result.ranking) ranking.push_back({{"policy_id", id}, {"utility", u}});
    return {{"policy_id", result.policy_id}, {"utility", result.utility}, {"ranking", std::move(ranking)}};
}

}  // namespace pluralis
