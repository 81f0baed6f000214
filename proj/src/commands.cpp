#include "pluralis/commands.hpp"

#include <chrono>
#include <ostream>

#include "pluralis/coverage.hpp"
#include "pluralis/error.hpp"
#include "pluralis/service.hpp"
#include "pluralis/steering.hpp"
#include "pluralis/utility.hpp"

// after Eigen: resolv.h defines a _res macro that collides with Eigen internals
#include <httplib.h>

namespace pluralis {

std::filesystem::path summary_path_for(const std::filesystem::path& log_path) {
    auto p = log_path;
    p.replace_extension(".csv");
    return p;
}

int cmd_build(const std::filesystem::path& env_path, std::size_t resolution, const std::string& kind,
              const std::filesystem::path& out_path, std::ostream& out, std::ostream& err) {
    try {
        if (kind != "ccs" && kind != "pareto") throw ConfigError("--kind", "expected 'ccs' or 'pareto'");
        const auto started = std::chrono::steady_clock::now();
        const Momdp momdp = load_momdp_file(env_path);
        const CoverageSet cs = kind == "ccs" ? convex_coverage_set(momdp, resolution) : pareto_set_bruteforce(momdp);
        save_coverage_file(cs, out_path);
        const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started);
        out << "entries: " << cs.entries.size() << "\n";
        out << "wall time: " << elapsed.count() << " ms\n";
        return kExitOk;
    } catch (const GuardExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kExitGuard;
    } catch (const Error& e) {
        err << "error: " << env_path.string() << ": " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_select(const std::filesystem::path& cs_path, const std::filesystem::path& utility_path, std::ostream& out,
               std::ostream& err) {
    CoverageSet cs;
    UtilitySpec spec = UtilitySpec::make_nsw();
    try {
        cs = load_coverage_file(cs_path);
        spec = load_utility_file(utility_path);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        out << dump_exact(selection_to_json(select_policy(cs, spec))) << "\n";
        return kExitOk;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_steer(const std::filesystem::path& cs_path, const std::filesystem::path& env_path,
              const std::vector<double>& true_weights, std::size_t steps, std::uint64_t seed,
              const std::filesystem::path& log_path, const SteerFlags& flags, std::ostream& out, std::ostream& err) {
    try {
        const Momdp momdp = load_momdp_file(env_path);
        const CoverageSet cs = load_coverage_file(cs_path);
        SteeringOptions options;
        options.beta = flags.beta;
        options.resolution = flags.resolution;
        options.noiseless = flags.noiseless;
        if (flags.jury_path) options.jury = jury_from_json(read_json_file(*flags.jury_path));
        const WeightVector user(
            Eigen::Map<const Eigen::VectorXd>(true_weights.data(), static_cast<Eigen::Index>(true_weights.size())));
        const SessionLog log = steering_session(momdp, cs, user, steps, seed, options);
        write_text_file(log_path, log.to_jsonl());
        write_text_file(summary_path_for(log_path), log.summary_csv());
        out << "switches: " << log.switches << "\n";
        out << "apologies: " << log.apologies << "\n";
        out << "final policy: " << log.final_policy << "\n";
        return kExitOk;
    } catch (const FingerprintMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kExitFingerprint;
    } catch (const GuardExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kExitGuard;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

int cmd_serve(int port, const std::filesystem::path& cs_path, const std::filesystem::path& env_path,
              std::ostream& out, std::ostream& err) {
    std::unique_ptr<SteeringService> service;
    try {
        service = std::make_unique<SteeringService>(load_momdp_file(env_path), load_coverage_file(cs_path));
    } catch (const FingerprintMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kExitFingerprint;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    httplib::Server server;
    service->mount(server);
    if (!server.bind_to_port("0.0.0.0", port)) {
        err << "error: cannot bind port " << port << "\n";
        return kExitConfig;
    }
    out << "serving on port " << port << std::endl;
    server.listen_after_bind();
    return kExitOk;
}

}  // namespace pluralis
