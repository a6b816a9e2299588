#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mcvd/config.hpp"
#include "mcvd/training.hpp"

namespace mcvd {

// Exit statuses shared by the subcommands and main().
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs one training run and writes `config.resolved`, `curve.csv` and (for
// matrix games) `final_tables.txt` into out_dir. Progress goes to `log`.
// Returns kExitOk, or kExitFailure after a training abort.
int cmd_train(const TrainingConfig& cfg, const std::string& out_dir,
              std::ostream& log);

// Runs one training run per value of `axis`, each in its own subdirectory
// of out_dir, then writes summary.csv (value, final_mean_return,
// greedy_optimal, status). A failing cell is recorded and the remaining
// cells still run.
int cmd_sweep(const TrainingConfig& base, const std::string& axis,
              const std::vector<std::string>& values, const std::string& out_dir,
              std::ostream& log);

// Prints the optimality gap and the advisory alpha/sigma bounds for the
// given payoff table (or explicit gap inputs), plus whether the configured
// alpha and sigma satisfy them. Advisory only: always returns kExitOk for
// valid inputs.
struct BoundsRequest {
    std::string payoff;       // inline table; empty when delta_s/r_max given
    double delta_s = 0.0;     // used when payoff is empty
    double r_max = 0.0;       // used when payoff is empty
    int n_actions = 0;        // used when payoff is empty
    int n_agents = 2;
    double gamma = 0.0;       // one-step setting by default
    double sigma = 1.0;
    double alpha = 0.5;
};

int cmd_bounds(const BoundsRequest& req, std::ostream& out);

// Steps the reference grid layout through its four probe joint actions and
// prints expected vs actual rewards; nonzero on any mismatch.
int cmd_gridnav_oracle(std::ostream& out);

// Finite-difference gradient audit over randomly initialized agent,
// joint and mixer networks plus the loss operators; nonzero when any
// relative error reaches 1e-4.
int cmd_gradcheck(std::ostream& out);

// Helpers shared with the test suite.
std::string curve_csv(const RunResult& result);
std::string final_tables_text(const EvalReport& report);
std::vector<int> payoff_argmax(const std::vector<std::vector<double>>& payoff);

} // namespace mcvd
