#include "pluralis/service.hpp"

#include <cstdio>
#include <regex>

#include "pluralis/error.hpp"

// after Eigen: resolv.h defines a _res macro that collides with Eigen internals
#include <httplib.h>

namespace pluralis {
namespace {

constexpr std::size_t kMaxStepsPerRequest = 100'000;

ApiResponse json_response(int status, const Json& body) { return {status, dump_exact(body), "application/json"}; }

ApiResponse error_response(int status, const std::string& message, const std::string& path = "") {
    return json_response(status, {{"error", message}, {"path", path}});
}

Json parse_body(const std::string& body) {
    if (body.empty()) return Json::object();
    try {
        Json doc = Json::parse(body);
        if (!doc.is_object()) throw ConfigError("", "request body must be a JSON object");
        return doc;
    } catch (const Json::parse_error& e) {
        throw ConfigError("", std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string session_token(std::uint64_t counter) {
    Rng mix(counter);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "s%016llx", static_cast<unsigned long long>(mix.next_u64()));
    return buf;
}

}  // namespace

SteeringService::SteeringService(Momdp momdp, CoverageSet cs) : momdp_(std::move(momdp)), cs_(std::move(cs)) {
    if (cs_.momdp_fingerprint != momdp_.fingerprint())
        throw FingerprintMismatch("coverage set fingerprint " + cs_.momdp_fingerprint +
                                  " does not match environment fingerprint " + momdp_.fingerprint());
}

std::size_t SteeringService::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::shared_ptr<SteeringService::Slot> SteeringService::find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
}

ApiResponse SteeringService::create_session(const Json& body) {
    SessionConfig config;
    auto seed = body.find("seed");
    if (seed == body.end()) throw ConfigError("/seed", "required field missing");
    if (!seed->is_number_integer() || seed->get<long long>() < 0)
        throw ConfigError("/seed", "expected a nonnegative integer");
    config.seed = seed->get<std::uint64_t>();
    if (auto it = body.find("beta"); it != body.end() && !it->is_null()) {
        if (!it->is_number() || !(it->get<double>() > 0.0)) throw ConfigError("/beta", "expected a positive number");
        config.beta = it->get<double>();
    }
    if (auto it = body.find("resolution"); it != body.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<long long>() < 1)
            throw ConfigError("/resolution", "expected a positive integer");
        config.resolution = it->get<std::size_t>();
    }
    if (auto it = body.find("jury"); it != body.end() && !it->is_null()) config.jury = jury_from_json(*it, "/jury");

    auto slot = std::make_shared<Slot>(momdp_, cs_, std::move(config));
    std::string id;
    {
        std::unique_lock lock(sessions_mutex_);
        id = session_token(next_session_++);
        sessions_.emplace(id, slot);
    }
    return json_response(200, {{"session_id", id}, {"policy_id", slot->session.policy_id()}});
}

ApiResponse SteeringService::handle(const std::string& method, const std::string& path, const std::string& body) {
    static const std::regex session_route(R"(^/api/session/([A-Za-z0-9]+)/(state|preferences|feedback|step|log)$)");
    try {
        if (path == "/api/momdp") {
            if (method != "GET") return error_response(405, "method not allowed");
            return json_response(200, momdp_summary(momdp_));
        }
        if (path == "/api/coverage") {
            if (method != "GET") return error_response(405, "method not allowed");
            return json_response(200, coverage_to_json(cs_));
        }
        if (path == "/api/session") {
            if (method != "POST") return error_response(405, "method not allowed");
            return create_session(parse_body(body));
        }
        std::smatch m;
        if (!std::regex_match(path, m, session_route)) return error_response(404, "no route for " + path);
        const std::string action = m[2];
        const bool is_get = action == "state" || action == "log";
        if ((method == "GET") != is_get) return error_response(405, "method not allowed");

        auto slot = find(m[1]);
        std::lock_guard lock(slot->mutex);
        SteeringSession& session = slot->session;

        if (action == "state") return json_response(200, session.state());
        if (action == "log") {
            std::string out;
            for (const auto& r : session.log()) out += dump_exact(r) + "\n";
            return {200, std::move(out), "application/x-ndjson"};
        }
        const Json doc = parse_body(body);
        if (action == "preferences") {
            if (doc.contains("weights")) {
                std::vector<double> w;
                try {
                    w = doc["weights"].get<std::vector<double>>();
                } catch (const Json::exception&) {
                    throw ConfigError("/weights", "expected an array of numbers");
                }
                if (w.size() != momdp_.num_objectives())
                    throw ConfigError("/weights", "expected " + std::to_string(momdp_.num_objectives()) + " weights");
                try {
                    WeightVector wv(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
                    return json_response(200, selection_to_json(session.set_preferences(UtilitySpec::linear(wv))));
                } catch (const InvalidArgument& e) {
                    throw ConfigError("/weights", e.what());
                }
            }
            if (doc.contains("utility_spec")) {
                const UtilitySpec spec = utility_from_json(doc["utility_spec"], "/utility_spec");
                try {
                    return json_response(200, selection_to_json(session.set_preferences(spec)));
                } catch (const DimensionMismatch& e) {
                    throw ConfigError("/utility_spec", e.what());
                }
            }
            throw ConfigError("", "expected \"weights\" or \"utility_spec\"");
        }
        if (action == "feedback") {
            if (!doc.contains("kind") || !doc["kind"].is_string()) throw ConfigError("/kind", "required string field missing");
            FeedbackKind kind;
            try {
                kind = feedback_kind_from_string(doc["kind"].get<std::string>());
            } catch (const InvalidArgument& e) {
                throw ConfigError("/kind", e.what());
            }
            const FeedbackOutcome out = session.feedback(kind);
            return json_response(200, {{"apology", out.apology}, {"switched", out.switched}, {"policy_id", out.policy_id}});
        }
        // step
        std::size_t count = 1;
        if (auto it = doc.find("count"); it != doc.end()) {
            if (!it->is_number_integer() || it->get<long long>() < 0 ||
                it->get<std::size_t>() > kMaxStepsPerRequest)
                throw ConfigError("/count", "expected an integer in 0..100000");
            count = it->get<std::size_t>();
        }
        session.step(count);
        return json_response(200, session.state());
    } catch (const ConfigError& e) {
        return error_response(400, e.what(), e.path());
    } catch (const NotFound& e) {
        return error_response(404, e.what());
    } catch (const DomainError& e) {
        return error_response(400, e.what());
    } catch (const InvalidArgument& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

void SteeringService::mount(httplib::Server& server) {
    const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        ApiResponse out = handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body, out.content_type);
    };
    server.Get(R"(/api/.*)", forward);
    server.Post(R"(/api/.*)", forward);
}

}  // namespace pluralis
