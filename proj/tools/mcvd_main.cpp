#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcvd/commands.hpp"
#include "mcvd/errors.hpp"

namespace {

constexpr const char* kUsage =
    "usage: mcvd <subcommand> [options]\n"
    "\n"
    "subcommands:\n"
    "  train --out DIR [--config FILE] [--key value ...]\n"
    "      run one training run; any config key can be overridden by flag\n"
    "  sweep --axis KEY --values v1,v2,... --out DIR [--config FILE] [--key value ...]\n"
    "      one run per value of the swept key, plus summary.csv\n"
    "  bounds [--payoff \"r; r; r\"] [--delta_s X --r_max X --n_actions A]\n"
    "         [--n_agents N] [--gamma G] [--sigma S] [--alpha A]\n"
    "      print the advisory hyperparameter bounds\n"
    "  gridnav-oracle\n"
    "      verify the grid-world reward oracle probes\n"
    "  gradcheck\n"
    "      finite-difference audit of all gradients\n";

struct ParsedArgs {
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::string> axis;
    std::optional<std::string> values;
    std::vector<std::pair<std::string, std::string>> overrides;
};

// All options are --key value pairs; --config/--out/--axis/--values are
// reserved for the harness, everything else is treated as a config override.
ParsedArgs parse_args(const std::vector<std::string>& args) {
    ParsedArgs parsed;
    for (std::size_t i = 0; i < args.size(); i += 2) {
        const std::string& flag = args[i];
        if (flag.size() < 3 || flag.rfind("--", 0) != 0) {
            throw mcvd::UsageError("expected a --key, got \"" + flag + "\"");
        }
        if (i + 1 >= args.size()) {
            throw mcvd::UsageError("flag \"" + flag + "\" is missing its value");
        }
        const std::string key = flag.substr(2);
        const std::string& value = args[i + 1];
        if (key == "config") parsed.config = value;
        else if (key == "out") parsed.out = value;
        else if (key == "axis") parsed.axis = value;
        else if (key == "values") parsed.values = value;
        else parsed.overrides.emplace_back(key, value);
    }
    return parsed;
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

int run(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return mcvd::kExitUsage;
    }
    const std::string subcommand = argv[1];
    const std::vector<std::string> args(argv + 2, argv + argc);

    if (subcommand == "gridnav-oracle") {
        return mcvd::cmd_gridnav_oracle(std::cout);
    }
    if (subcommand == "gradcheck") {
        return mcvd::cmd_gradcheck(std::cout);
    }

    const ParsedArgs parsed = parse_args(args);
    if (subcommand == "train") {
        if (!parsed.out) {
            throw mcvd::UsageError("train needs --out DIR");
        }
        const mcvd::TrainingConfig cfg =
            mcvd::parse_config(parsed.config, parsed.overrides);
        return mcvd::cmd_train(cfg, *parsed.out, std::cout);
    }
    if (subcommand == "sweep") {
        if (!parsed.out || !parsed.axis || !parsed.values) {
            throw mcvd::UsageError("sweep needs --axis KEY, --values LIST and --out DIR");
        }
        const mcvd::TrainingConfig base =
            mcvd::parse_config(parsed.config, parsed.overrides);
        return mcvd::cmd_sweep(base, *parsed.axis, split_commas(*parsed.values),
                               *parsed.out, std::cout);
    }
    if (subcommand == "bounds") {
        mcvd::BoundsRequest req;
        for (const auto& [key, value] : parsed.overrides) {
            if (key == "payoff") req.payoff = value;
            else if (key == "delta_s") req.delta_s = std::stod(value);
            else if (key == "r_max") req.r_max = std::stod(value);
            else if (key == "n_actions") req.n_actions = std::stoi(value);
            else if (key == "n_agents") req.n_agents = std::stoi(value);
            else if (key == "gamma") req.gamma = std::stod(value);
            else if (key == "sigma") req.sigma = std::stod(value);
            else if (key == "alpha") req.alpha = std::stod(value);
            else throw mcvd::UsageError("bounds does not know flag \"--" + key + "\"");
        }
        return mcvd::cmd_bounds(req, std::cout);
    }
    std::cerr << kUsage;
    return mcvd::kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mcvd::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << kUsage;
        return mcvd::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return mcvd::kExitFailure;
    }
}
