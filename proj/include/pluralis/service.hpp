#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "pluralis/coverage.hpp"
#include "pluralis/momdp.hpp"
#include "pluralis/steering.hpp"

namespace httplib {
class Server;
}

namespace pluralis {

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// JSON API over one environment and its coverage set, hosting any number of
/// isolated steering sessions. The model and coverage set are shared
/// read-only; each session is guarded by its own mutex.
class SteeringService {
public:
    /// Throws FingerprintMismatch if `cs` was not built from `momdp`.
    SteeringService(Momdp momdp, CoverageSet cs);

    /// Routes one request. `path` excludes the query string and includes the
    /// /api prefix. Never throws: failures map to 400/404/405/500 bodies of
    /// the form {"error": ..., "path": ...}.
    ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

    /// Registers every route on an httplib server.
    void mount(httplib::Server& server);

    const Momdp& momdp() const { return momdp_; }
    const CoverageSet& coverage() const { return cs_; }
    std::size_t session_count() const;

private:
    struct Slot {
        std::mutex mutex;
        SteeringSession session;
        Slot(const Momdp& m, const CoverageSet& c, SessionConfig cfg) : session(m, c, std::move(cfg)) {}
    };

    ApiResponse create_session(const Json& body);
    std::shared_ptr<Slot> find(const std::string& id) const;

    const Momdp momdp_;
    const CoverageSet cs_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_session_ = 0;
};

}  // namespace pluralis
