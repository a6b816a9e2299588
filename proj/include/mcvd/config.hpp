#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcvd/env.hpp"

namespace mcvd {

enum class EnvKind { MatrixGame, GridNav, ParticleNav };
enum class LossKind { Mse, Ow, Mcvd };
enum class MixerKind { Sum, Monotonic };
enum class ArgmaxSource { Target, Online };
enum class UpdateUnit { Episodes, Steps };

// Fully resolved experiment configuration. Defaults reproduce the reference
// hyperparameter table; gamma, alpha and n_steps depend on the environment
// and are filled in by parse_config when not set explicitly.
struct TrainingConfig {
    EnvKind env = EnvKind::MatrixGame;
    LossKind loss = LossKind::Mcvd;
    MixerKind mixer = MixerKind::Sum;
    bool use_joint_net = true;
    double sigma = 1.0;
    double alpha = 0.5;                  // env default: 0.5 matrix, 0.1 otherwise
    std::uint64_t seed = 123;
    long n_steps = 20000;                // env default: 20000 matrix, 500000 otherwise
    long train_fre = 1;
    double gamma = 0.99;                 // env default: 0.99 matrix, 0.9 otherwise
    double lr = 5e-4;
    int batch_size = 32;
    long buffer_size = 5000;
    double max_epsilon = 1.0;
    double min_epsilon = 0.05;
    long anneal_steps = 50000;
    long target_update_cycle = 200;
    UpdateUnit target_update_unit = UpdateUnit::Episodes;
    double grad_norm_clip = 10.0;
    long evaluate_fre = 5000;
    int evaluate_epoch = 32;
    int hidden_dim = 64;
    int mixer_hidden = 32;
    bool last_action = true;
    bool reuse_network = true;
    ArgmaxSource double_q_argmax_source = ArgmaxSource::Target;
    double rmsprop_decay = 0.99;
    double rmsprop_eps = 1e-5;

    // Environment parameters.
    std::string payoff = "8 -12 -12; -12 6 6; -12 6 6";
    int grid_rows = 2;
    int grid_cols = 3;
    std::string grid_agents = "0,1 1,1";
    std::string grid_landmarks = "0,0 1,2";
    int n_agents = 3;                    // particlenav only
    int episode_limit = 25;
    double particle_dt = 0.1;
    double particle_damping = 0.25;
    double particle_accel_gain = 5.0;
    double particle_radius = 0.1;
};

// Parses an optional `key = value` config file (# starts a comment) and then
// applies `--key value` override flags, which win over the file. Unknown
// keys, malformed values and constraint violations raise ConfigError naming
// the offending key. The result is fully validated and canonicalized, so
// serialize_config(parse_config(...)) round-trips exactly.
TrainingConfig parse_config(
    const std::optional<std::string>& file_path,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Same as parse_config, but on in-memory config text.
TrainingConfig parse_config_text(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// True when `key` names a config field (useful to validate sweep axes
// before running anything).
bool is_config_key(const std::string& key);

// Canonical `key = value` text of every field, stable across runs.
std::string serialize_config(const TrainingConfig& cfg);

// Parses an inline payoff table: rows separated by ';', entries by spaces.
std::vector<std::vector<double>> parse_payoff(const std::string& text);

// Parses a cell list like "0,1 1,1" into (row, col) pairs.
std::vector<std::pair<int, int>> parse_cells(const std::string& text);

// Instantiates the configured environment.
std::unique_ptr<Env> make_env(const TrainingConfig& cfg);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

const char* to_string(EnvKind v);
const char* to_string(LossKind v);
const char* to_string(MixerKind v);
const char* to_string(ArgmaxSource v);
const char* to_string(UpdateUnit v);

} // namespace mcvd
