#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sliceshift/cli.hpp"
#include "sliceshift/decision.hpp"
#include "sliceshift/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"5G slice orchestration simulator with service shifting"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::string policy = "payoff";
    std::vector<std::string> policies;
    double duration_override = 0;

    CLI::App* sim = app.add_subcommand("simulate", "run one scenario under one policy");
    sim->add_option("--scenario", scenario, "scenario file")->required();
    sim->add_option("--seed", seed, "simulation seed");
    sim->add_option("--policy", policy, "payoff | qoe | reaction | scale_only");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--duration-override", duration_override, "override scenario duration [s]");

    CLI::App* cmp = app.add_subcommand("compare", "run several policies with the same seed");
    cmp->add_option("--scenario", scenario, "scenario file")->required();
    cmp->add_option("--seed", seed, "simulation seed");
    cmp->add_option("--policies", policies, "comma-separated policy list")
        ->required()
        ->delimiter(',');
    cmp->add_option("--out", out_dir, "output directory");
    cmp->add_option("--duration-override", duration_override, "override scenario duration [s]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::optional<double> override_opt;
    if (duration_override > 0) override_opt = duration_override;

    try {
        if (sim->parsed()) {
            return sliceshift::cmd_simulate(scenario, seed,
                                            sliceshift::policy_from_string(policy), out_dir,
                                            override_opt);
        }
        std::vector<sliceshift::Policy> parsed_policies;
        for (const auto& p : policies)
            parsed_policies.push_back(sliceshift::policy_from_string(p));
        return sliceshift::cmd_compare(scenario, seed, parsed_policies, out_dir, override_opt);
    } catch (const sliceshift::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
