#include "mcvd/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcvd/errors.hpp"

namespace mcvd {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
    throw ConfigError("config key \"" + key + "\": expected " + expected +
                      ", got \"" + value + "\"");
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    const char* begin = v.c_str();
    char* end = nullptr;
    const double out = std::strtod(begin, &end);
    if (end != begin + v.size() || v.empty()) {
        bad_value(key, value, "a real number");
    }
    return out;
}

long parse_long(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, value, "an integer");
    }
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    const long out = parse_long(key, value);
    if (out < std::numeric_limits<int>::min() || out > std::numeric_limits<int>::max()) {
        bad_value(key, value, "an integer in int range");
    }
    return static_cast<int>(out);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        bad_value(key, value, "a non-negative integer");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, value, "true or false");
}

EnvKind parse_env(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "matrix_game") return EnvKind::MatrixGame;
    if (v == "gridnav") return EnvKind::GridNav;
    if (v == "particlenav") return EnvKind::ParticleNav;
    bad_value(key, value, "matrix_game, gridnav or particlenav");
}

LossKind parse_loss(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "mse") return LossKind::Mse;
    if (v == "ow") return LossKind::Ow;
    if (v == "mcvd") return LossKind::Mcvd;
    bad_value(key, value, "mse, ow or mcvd");
}

MixerKind parse_mixer(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "sum") return MixerKind::Sum;
    if (v == "monotonic") return MixerKind::Monotonic;
    bad_value(key, value, "sum or monotonic");
}

ArgmaxSource parse_argmax_source(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "target") return ArgmaxSource::Target;
    if (v == "online") return ArgmaxSource::Online;
    bad_value(key, value, "target or online");
}

UpdateUnit parse_update_unit(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "episodes") return UpdateUnit::Episodes;
    if (v == "steps") return UpdateUnit::Steps;
    bad_value(key, value, "episodes or steps");
}

void require(bool ok, const std::string& key, const std::string& constraint) {
    if (!ok) {
        throw ConfigError("config key \"" + key + "\": " + constraint);
    }
}

std::string canonical_payoff(const std::vector<std::vector<double>>& table) {
    std::string out;
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (r > 0) out += "; ";
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            if (c > 0) out += " ";
            out += format_double(table[r][c]);
        }
    }
    return out;
}

std::string canonical_cells(const std::vector<std::pair<int, int>>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out += " ";
        out += std::to_string(cells[i].first) + "," + std::to_string(cells[i].second);
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) {
        throw UsageError("failed to format a double");
    }
    return std::string(buf, ptr);
}

std::vector<std::vector<double>> parse_payoff(const std::string& text) {
    std::vector<std::vector<double>> table;
    std::stringstream rows(text);
    std::string row;
    while (std::getline(rows, row, ';')) {
        std::vector<double> entries;
        std::stringstream cells(row);
        std::string cell;
        while (cells >> cell) {
            entries.push_back(parse_double("payoff", cell));
        }
        if (!entries.empty()) {
            table.push_back(std::move(entries));
        }
    }
    if (table.empty()) {
        throw ConfigError("config key \"payoff\": table is empty");
    }
    for (const auto& r : table) {
        if (r.size() != table.size()) {
            throw ConfigError("config key \"payoff\": table must be square");
        }
    }
    return table;
}

std::vector<std::pair<int, int>> parse_cells(const std::string& text) {
    std::vector<std::pair<int, int>> cells;
    std::stringstream words(text);
    std::string word;
    while (words >> word) {
        const auto comma = word.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("cell \"" + word + "\" must look like row,col");
        }
        cells.emplace_back(parse_int("cell", word.substr(0, comma)),
                           parse_int("cell", word.substr(comma + 1)));
    }
    if (cells.empty()) {
        throw ConfigError("cell list is empty");
    }
    return cells;
}

namespace {

using KeyValue = std::pair<std::string, std::string>;

std::vector<KeyValue> read_config_entries(std::istream& in, const std::string& origin) {
    std::vector<KeyValue> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + " line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        entries.emplace_back(trim(stripped.substr(0, eq)),
                             trim(stripped.substr(eq + 1)));
    }
    return entries;
}

std::vector<KeyValue> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file \"" + path + "\"");
    }
    return read_config_entries(in, "config file \"" + path + "\"");
}

// Loads a payoff table from a file: one row per line (or ';'-separated),
// entries separated by spaces. Returned in the inline format.
std::string read_payoff_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open payoff file \"" + path + "\"");
    }
    std::string text, line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (!text.empty()) text += "; ";
        text += trim(line);
    }
    return text;
}

void apply_key(TrainingConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "env") cfg.env = parse_env(key, value);
    else if (key == "loss") cfg.loss = parse_loss(key, value);
    else if (key == "mixer") cfg.mixer = parse_mixer(key, value);
    else if (key == "use_joint_net") cfg.use_joint_net = parse_bool(key, value);
    else if (key == "sigma") cfg.sigma = parse_double(key, value);
    else if (key == "alpha") cfg.alpha = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "n_steps") cfg.n_steps = parse_long(key, value);
    else if (key == "train_fre") cfg.train_fre = parse_long(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_int(key, value);
    else if (key == "buffer_size") cfg.buffer_size = parse_long(key, value);
    else if (key == "max_epsilon") cfg.max_epsilon = parse_double(key, value);
    else if (key == "min_epsilon") cfg.min_epsilon = parse_double(key, value);
    else if (key == "anneal_steps") cfg.anneal_steps = parse_long(key, value);
    else if (key == "target_update_cycle") cfg.target_update_cycle = parse_long(key, value);
    else if (key == "target_update_unit") cfg.target_update_unit = parse_update_unit(key, value);
    else if (key == "grad_norm_clip") cfg.grad_norm_clip = parse_double(key, value);
    else if (key == "evaluate_fre") cfg.evaluate_fre = parse_long(key, value);
    else if (key == "evaluate_epoch") cfg.evaluate_epoch = parse_int(key, value);
    else if (key == "hidden_dim") cfg.hidden_dim = parse_int(key, value);
    else if (key == "mixer_hidden") cfg.mixer_hidden = parse_int(key, value);
    else if (key == "last_action") cfg.last_action = parse_bool(key, value);
    else if (key == "reuse_network") cfg.reuse_network = parse_bool(key, value);
    else if (key == "double_q_argmax_source")
        cfg.double_q_argmax_source = parse_argmax_source(key, value);
    else if (key == "rmsprop_decay") cfg.rmsprop_decay = parse_double(key, value);
    else if (key == "rmsprop_eps") cfg.rmsprop_eps = parse_double(key, value);
    else if (key == "payoff") cfg.payoff = value;
    else if (key == "payoff_path") cfg.payoff = read_payoff_file(value);
    else if (key == "grid_rows") cfg.grid_rows = parse_int(key, value);
    else if (key == "grid_cols") cfg.grid_cols = parse_int(key, value);
    else if (key == "grid_agents") cfg.grid_agents = value;
    else if (key == "grid_landmarks") cfg.grid_landmarks = value;
    else if (key == "n_agents") cfg.n_agents = parse_int(key, value);
    else if (key == "episode_limit") cfg.episode_limit = parse_int(key, value);
    else if (key == "particle_dt") cfg.particle_dt = parse_double(key, value);
    else if (key == "particle_damping") cfg.particle_damping = parse_double(key, value);
    else if (key == "particle_accel_gain") cfg.particle_accel_gain = parse_double(key, value);
    else if (key == "particle_radius") cfg.particle_radius = parse_double(key, value);
    else {
        throw ConfigError("unknown config key \"" + key + "\"");
    }
}

void validate(TrainingConfig& cfg) {
    require(cfg.sigma > 0.0, "sigma", "must be > 0 (got " + format_double(cfg.sigma) + ")");
    require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, "alpha",
            "must lie in (0, 1] (got " + format_double(cfg.alpha) + ")");
    require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "gamma",
            "must lie in [0, 1) (got " + format_double(cfg.gamma) + ")");
    require(cfg.n_steps >= 1, "n_steps", "must be >= 1");
    require(cfg.train_fre >= 1, "train_fre", "must be >= 1");
    require(cfg.lr > 0.0, "lr", "must be > 0");
    require(cfg.batch_size >= 1, "batch_size", "must be >= 1");
    require(cfg.buffer_size >= cfg.batch_size, "buffer_size",
            "must be >= batch_size");
    require(cfg.max_epsilon >= 0.0 && cfg.max_epsilon <= 1.0, "max_epsilon",
            "must lie in [0, 1]");
    require(cfg.min_epsilon >= 0.0 && cfg.min_epsilon <= cfg.max_epsilon,
            "min_epsilon", "must lie in [0, max_epsilon]");
    require(cfg.anneal_steps >= 1, "anneal_steps", "must be >= 1");
    require(cfg.target_update_cycle >= 1, "target_update_cycle", "must be >= 1");
    require(cfg.grad_norm_clip > 0.0, "grad_norm_clip", "must be > 0");
    require(cfg.evaluate_fre >= 1, "evaluate_fre", "must be >= 1");
    require(cfg.evaluate_epoch >= 1, "evaluate_epoch", "must be >= 1");
    require(cfg.hidden_dim >= 1, "hidden_dim", "must be >= 1");
    require(cfg.mixer_hidden >= 1, "mixer_hidden", "must be >= 1");
    require(cfg.rmsprop_decay > 0.0 && cfg.rmsprop_decay < 1.0, "rmsprop_decay",
            "must lie in (0, 1)");
    require(cfg.rmsprop_eps > 0.0, "rmsprop_eps", "must be > 0");
    require(cfg.n_agents >= 1, "n_agents", "must be >= 1");
    require(cfg.episode_limit >= 1, "episode_limit", "must be >= 1");

    // Canonicalize the environment layout strings so that serialization is
    // stable, and surface layout errors now rather than at run start.
    try {
        cfg.payoff = canonical_payoff(parse_payoff(cfg.payoff));
    } catch (const ConfigError& e) {
        throw ConfigError("config key \"payoff\": " + std::string(e.what()));
    }
    try {
        cfg.grid_agents = canonical_cells(parse_cells(cfg.grid_agents));
        cfg.grid_landmarks = canonical_cells(parse_cells(cfg.grid_landmarks));
    } catch (const ConfigError& e) {
        throw ConfigError("config keys \"grid_agents\"/\"grid_landmarks\": " +
                          std::string(e.what()));
    }
    // Constructing the environment validates the remaining parameters.
    make_env(cfg);
}

} // namespace

namespace {

TrainingConfig resolve_entries(std::vector<KeyValue> entries) {
    // The environment choice decides the defaults of gamma, alpha and
    // n_steps, so resolve it first (the last occurrence wins, flags after
    // file entries).
    TrainingConfig cfg;
    for (const auto& [key, value] : entries) {
        if (key == "env") {
            cfg.env = parse_env(key, value);
        }
    }
    if (cfg.env != EnvKind::MatrixGame) {
        cfg.gamma = 0.9;
        cfg.alpha = 0.1;
        cfg.n_steps = 500000;
    }

    for (const auto& [key, value] : entries) {
        apply_key(cfg, key, value);
    }
    validate(cfg);
    return cfg;
}

} // namespace

TrainingConfig parse_config(
    const std::optional<std::string>& file_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::vector<KeyValue> entries;
    if (file_path) {
        entries = read_config_file(*file_path);
    }
    entries.insert(entries.end(), overrides.begin(), overrides.end());
    return resolve_entries(std::move(entries));
}

TrainingConfig parse_config_text(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::istringstream in(text);
    std::vector<KeyValue> entries = read_config_entries(in, "config text");
    entries.insert(entries.end(), overrides.begin(), overrides.end());
    return resolve_entries(std::move(entries));
}

bool is_config_key(const std::string& key) {
    static const char* const kKeys[] = {
        "env", "loss", "mixer", "use_joint_net", "sigma", "alpha", "seed",
        "n_steps", "train_fre", "gamma", "lr", "batch_size", "buffer_size",
        "max_epsilon", "min_epsilon", "anneal_steps", "target_update_cycle",
        "target_update_unit", "grad_norm_clip", "evaluate_fre", "evaluate_epoch",
        "hidden_dim", "mixer_hidden", "last_action", "reuse_network",
        "double_q_argmax_source", "rmsprop_decay", "rmsprop_eps", "payoff",
        "payoff_path", "grid_rows", "grid_cols", "grid_agents", "grid_landmarks",
        "n_agents", "episode_limit", "particle_dt", "particle_damping",
        "particle_accel_gain", "particle_radius",
    };
    for (const char* k : kKeys) {
        if (key == k) return true;
    }
    return false;
}

std::string serialize_config(const TrainingConfig& cfg) {
    std::string out;
    auto put = [&out](const std::string& key, const std::string& value) {
        out += key + " = " + value + "\n";
    };
    put("env", to_string(cfg.env));
    put("loss", to_string(cfg.loss));
    put("mixer", to_string(cfg.mixer));
    put("use_joint_net", cfg.use_joint_net ? "true" : "false");
    put("sigma", format_double(cfg.sigma));
    put("alpha", format_double(cfg.alpha));
    put("seed", std::to_string(cfg.seed));
    put("n_steps", std::to_string(cfg.n_steps));
    put("train_fre", std::to_string(cfg.train_fre));
    put("gamma", format_double(cfg.gamma));
    put("lr", format_double(cfg.lr));
    put("batch_size", std::to_string(cfg.batch_size));
    put("buffer_size", std::to_string(cfg.buffer_size));
    put("max_epsilon", format_double(cfg.max_epsilon));
    put("min_epsilon", format_double(cfg.min_epsilon));
    put("anneal_steps", std::to_string(cfg.anneal_steps));
    put("target_update_cycle", std::to_string(cfg.target_update_cycle));
    put("target_update_unit", to_string(cfg.target_update_unit));
    put("grad_norm_clip", format_double(cfg.grad_norm_clip));
    put("evaluate_fre", std::to_string(cfg.evaluate_fre));
    put("evaluate_epoch", std::to_string(cfg.evaluate_epoch));
    put("hidden_dim", std::to_string(cfg.hidden_dim));
    put("mixer_hidden", std::to_string(cfg.mixer_hidden));
    put("last_action", cfg.last_action ? "true" : "false");
    put("reuse_network", cfg.reuse_network ? "true" : "false");
    put("double_q_argmax_source", to_string(cfg.double_q_argmax_source));
    put("rmsprop_decay", format_double(cfg.rmsprop_decay));
    put("rmsprop_eps", format_double(cfg.rmsprop_eps));
    put("payoff", cfg.payoff);
    put("grid_rows", std::to_string(cfg.grid_rows));
    put("grid_cols", std::to_string(cfg.grid_cols));
    put("grid_agents", cfg.grid_agents);
    put("grid_landmarks", cfg.grid_landmarks);
    put("n_agents", std::to_string(cfg.n_agents));
    put("episode_limit", std::to_string(cfg.episode_limit));
    put("particle_dt", format_double(cfg.particle_dt));
    put("particle_damping", format_double(cfg.particle_damping));
    put("particle_accel_gain", format_double(cfg.particle_accel_gain));
    put("particle_radius", format_double(cfg.particle_radius));
    return out;
}

std::unique_ptr<Env> make_env(const TrainingConfig& cfg) {
    switch (cfg.env) {
    case EnvKind::MatrixGame:
        return std::make_unique<MatrixGameEnv>(parse_payoff(cfg.payoff));
    case EnvKind::GridNav: {
        GridNavSpec spec;
        spec.rows = cfg.grid_rows;
        spec.cols = cfg.grid_cols;
        spec.agent_cells = parse_cells(cfg.grid_agents);
        spec.landmark_cells = parse_cells(cfg.grid_landmarks);
        spec.episode_limit = cfg.episode_limit;
        return std::make_unique<GridNavEnv>(spec);
    }
    case EnvKind::ParticleNav: {
        ParticleNavSpec spec;
        spec.n_agents = cfg.n_agents;
        spec.episode_limit = cfg.episode_limit;
        spec.dt = cfg.particle_dt;
        spec.damping = cfg.particle_damping;
        spec.accel_gain = cfg.particle_accel_gain;
        spec.radius = cfg.particle_radius;
        return std::make_unique<ParticleNavEnv>(spec);
    }
    }
    throw ConfigError("unknown environment kind");
}

const char* to_string(EnvKind v) {
    switch (v) {
    case EnvKind::MatrixGame: return "matrix_game";
    case EnvKind::GridNav: return "gridnav";
    case EnvKind::ParticleNav: return "particlenav";
    }
    return "?";
}

const char* to_string(LossKind v) {
    switch (v) {
    case LossKind::Mse: return "mse";
    case LossKind::Ow: return "ow";
    case LossKind::Mcvd: return "mcvd";
    }
    return "?";
}

const char* to_string(MixerKind v) {
    switch (v) {
    case MixerKind::Sum: return "sum";
    case MixerKind::Monotonic: return "monotonic";
    }
    return "?";
}

const char* to_string(ArgmaxSource v) {
    switch (v) {
    case ArgmaxSource::Target: return "target";
    case ArgmaxSource::Online: return "online";
    }
    return "?";
}

const char* to_string(UpdateUnit v) {
    switch (v) {
    case UpdateUnit::Episodes: return "episodes";
    case UpdateUnit::Steps: return "steps";
    }
    return "?";
}

} // namespace mcvd
