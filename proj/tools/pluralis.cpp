#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pluralis/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Coverage sets of Pareto-optimal policies and pluralistic policy steering"};
    app.require_subcommand(1);

    std::string env_path, out_path, cs_path, utility_path, log_path, kind = "ccs";
    std::size_t resolution = 10, steps = 100;
    std::uint64_t seed = 0;
    std::vector<double> true_weights;
    int port = 8080;
    pluralis::SteerFlags steer_flags;
    std::string jury_path;

    auto* build = app.add_subcommand("build", "Compute a coverage set for an environment");
    build->add_option("--env_path,--env", env_path, "Environment JSON")->required();
    build->add_option("--resolution", resolution, "Simplex subdivisions per axis (ccs)");
    build->add_option("--kind", kind, "ccs or pareto")->check(CLI::IsMember({"ccs", "pareto"}));
    build->add_option("--out_path,--out", out_path, "Output coverage set JSON")->required();

    auto* select = app.add_subcommand("select", "Select a policy from a coverage set with a utility");
    select->add_option("--cs_path,--cs", cs_path, "Coverage set JSON")->required();
    select->add_option("--utility_path,--utility", utility_path, "Utility spec JSON")->required();

    auto* steer = app.add_subcommand("steer", "Run a simulated steering session");
    steer->add_option("--cs_path,--cs", cs_path, "Coverage set JSON")->required();
    steer->add_option("--env_path,--env", env_path, "Environment JSON")->required();
    steer->add_option("--true_weights,--true-weights", true_weights, "Simulated user's weights")
        ->required()
        ->delimiter(',');
    steer->add_option("--steps", steps, "Number of environment steps");
    steer->add_option("--seed", seed, "Random seed");
    steer->add_option("--log_path,--log", log_path, "JSON-lines log output (CSV summary written alongside)")
        ->required();
    steer->add_option("--beta", steer_flags.beta, "Feedback likelihood sharpness");
    steer->add_option("--pref_resolution", steer_flags.resolution, "Preference grid resolution");
    steer->add_flag("--noiseless", steer_flags.noiseless, "Simulated user never errs");
    steer->add_option("--jury", jury_path, "Jury JSON for welfare reporting");

    auto* serve = app.add_subcommand("serve", "Serve the steering HTTP API");
    serve->add_option("--port", port, "Listen port (PLURALIS_PORT overrides)");
    serve->add_option("--cs_path,--cs", cs_path, "Coverage set JSON")->required();
    serve->add_option("--env_path,--env", env_path, "Environment JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // usage errors count as configuration errors; --help stays 0
        return app.exit(e) == 0 ? pluralis::kExitOk : pluralis::kExitConfig;
    }

    if (*build) return pluralis::cmd_build(env_path, resolution, kind, out_path, std::cout, std::cerr);
    if (*select) return pluralis::cmd_select(cs_path, utility_path, std::cout, std::cerr);
    if (*steer) {
        if (!jury_path.empty()) steer_flags.jury_path = jury_path;
        return pluralis::cmd_steer(cs_path, env_path, true_weights, steps, seed, log_path, steer_flags, std::cout,
                                   std::cerr);
    }
    if (const char* env_port = std::getenv("PLURALIS_PORT")) {
        try {
            port = std::stoi(env_port);
        } catch (const std::exception&) {
            std::cerr << "error: PLURALIS_PORT is not a port number\n";
            return pluralis::kExitConfig;
        }
    }
    return pluralis::cmd_serve(port, cs_path, env_path, std::cout, std::cerr);
}
