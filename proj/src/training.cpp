#include "mcvd/training.hpp"

#include <cmath>
#include <string>

#include "mcvd/errors.hpp"
#include "mcvd/losses.hpp"

namespace mcvd {

std::vector<int> select_actions(const AgentQNet& agents,
                                const std::vector<std::vector<double>>& observations,
                                std::span<const int> last_actions, double epsilon,
                                Rng& rng) {
    const int n = agents.encoding().n_agents;
    const int n_actions = agents.encoding().n_actions;
    if (static_cast<int>(observations.size()) != n ||
        static_cast<int>(last_actions.size()) != n) {
        throw UsageError("select_actions needs one observation and one last action "
                         "per agent");
    }
    std::vector<int> joint(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (epsilon > 0.0 && rng.uniform() < epsilon) {
            joint[static_cast<std::size_t>(i)] = rng.uniform_int(n_actions);
        } else {
            joint[static_cast<std::size_t>(i)] = argmax_lowest(
                agents.individual_q(observations[static_cast<std::size_t>(i)],
                                    last_actions[i], i));
        }
    }
    return joint;
}

const EvalReport& RunResult::final_report() const {
    if (curve.empty()) {
        throw UsageError("run produced no evaluation rows");
    }
    return curve.back();
}

namespace {

AgentEncoding make_encoding(const TrainingConfig& cfg, const Env& env) {
    AgentEncoding enc;
    enc.obs_dim = env.obs_dim();
    enc.n_actions = env.n_actions();
    enc.n_agents = env.n_agents();
    enc.use_last_action = cfg.last_action;
    enc.shared_network = cfg.reuse_network;
    return enc;
}

} // namespace

Trainer::Trainer(const TrainingConfig& cfg)
    : cfg_(cfg), env_(make_env(cfg)),
      agents_([&] {
          Rng init(derive_seed(cfg.seed, "init/agent"));
          return AgentQNet(make_encoding(cfg, *env_),
                           {cfg.hidden_dim, cfg.hidden_dim}, init);
      }()),
      buffer_(static_cast<std::size_t>(cfg.buffer_size)),
      schedule_{cfg.max_epsilon, cfg.min_epsilon, cfg.anneal_steps},
      opt_{cfg.rmsprop_decay, cfg.rmsprop_eps},
      collect_rng_(derive_seed(cfg.seed, "collect")),
      sample_rng_(derive_seed(cfg.seed, "sample")),
      eval_rng_(derive_seed(cfg.seed, "eval")) {
    if (cfg_.use_joint_net) {
        Rng init(derive_seed(cfg.seed, "init/joint"));
        joint_.emplace(env_->state_dim(), env_->n_agents(), env_->n_actions(),
                       std::vector<int>{cfg.hidden_dim, cfg.hidden_dim}, init);
    }
    if (cfg_.mixer == MixerKind::Monotonic) {
        Rng init(derive_seed(cfg.seed, "init/mixer"));
        mixer_.emplace(env_->n_agents(), env_->state_dim(), cfg.mixer_hidden, init);
        mixer_target_.emplace(*mixer_); // target starts as an exact copy
    }
}

void Trainer::sync_all_targets() {
    agents_.sync_targets();
    if (joint_) {
        joint_->sync_targets();
    }
    if (mixer_) {
        mixer_target_->sync_from(*mixer_);
    }
}

// Target-side value of the bootstrap action for a non-terminal transition.
// The argmax comes from target or online individual networks per config;
// the evaluation always uses target-side parameters.
double Trainer::bootstrap_value(const Transition& t) {
    const int n = env_->n_agents();
    std::vector<int> next_greedy(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::vector<double> q =
            cfg_.double_q_argmax_source == ArgmaxSource::Target
                ? agents_.individual_q_target(t.next_obs[static_cast<std::size_t>(i)],
                                              t.actions[static_cast<std::size_t>(i)], i)
                : agents_.individual_q(t.next_obs[static_cast<std::size_t>(i)],
                                       t.actions[static_cast<std::size_t>(i)], i);
        next_greedy[static_cast<std::size_t>(i)] = argmax_lowest(q);
    }
    if (joint_) {
        return joint_->joint_q_target(t.next_state, next_greedy);
    }
    // Joint approximation disabled: bootstrap from the target-side mixture
    // of the chosen target individual values.
    std::vector<double> chosen(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        chosen[static_cast<std::size_t>(i)] = agents_.individual_q_target(
            t.next_obs[static_cast<std::size_t>(i)],
            t.actions[static_cast<std::size_t>(i)],
            i)[static_cast<std::size_t>(next_greedy[static_cast<std::size_t>(i)])];
    }
    if (mixer_target_) {
        return mixer_target_->mix(chosen, t.next_state);
    }
    return sum_mix(chosen);
}

TrainMetrics Trainer::train_step(std::span<const Transition* const> batch) {
    if (batch.empty()) {
        throw UsageError("train_step on an empty batch");
    }
    const int n = env_->n_agents();
    const double inv_m = 1.0 / static_cast<double>(batch.size());

    for (DenseNet* net : agents_.online_nets()) {
        net->zero_grad();
    }
    if (mixer_) {
        mixer_->zero_grad();
    }
    if (joint_) {
        joint_->online().zero_grad();
    }

    // Pass 1: targets from the frozen side only.
    std::vector<double> y(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const Transition& t = *batch[k];
        y[k] = td_target(t.reward, cfg_.gamma, t.terminal,
                         t.terminal ? 0.0 : bootstrap_value(t));
    }

    // Pass 2: per-sample forward, weighting, immediate backward. Samples and
    // agents are processed in a fixed order for reproducibility.
    TrainMetrics metrics;
    std::vector<Trace> traces(static_cast<std::size_t>(n));
    std::vector<double> chosen(static_cast<std::size_t>(n));
    const KernelBandwidth kernel(cfg_.sigma);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const Transition& t = *batch[k];
        for (int i = 0; i < n; ++i) {
            const std::vector<double> x = agents_.encoding().encode(
                t.obs[static_cast<std::size_t>(i)], t.last_actions[static_cast<std::size_t>(i)], i);
            agents_.net_for(i).forward(x, traces[static_cast<std::size_t>(i)]);
            chosen[static_cast<std::size_t>(i)] =
                traces[static_cast<std::size_t>(i)]
                    .out[static_cast<std::size_t>(t.actions[static_cast<std::size_t>(i)])];
        }
        const double q_jt = mixer_ ? mixer_->mix(chosen, t.state) : sum_mix(chosen);
        double w = 1.0;
        if (cfg_.loss == LossKind::Mcvd) {
            w = mcvd_weight(q_jt, y[k], kernel);
        } else if (cfg_.loss == LossKind::Ow) {
            w = ow_weight(q_jt, y[k], cfg_.alpha);
        }
        const double e = q_jt - y[k];
        metrics.loss_td += w * e * e * inv_m;
        const double g = 2.0 * w * e * inv_m; // weight held constant

        std::vector<double> dq;
        if (mixer_) {
            dq = mixer_->backward(g);
        } else {
            dq.assign(static_cast<std::size_t>(n), g);
        }
        std::vector<double> upstream(static_cast<std::size_t>(env_->n_actions()));
        for (int i = 0; i < n; ++i) {
            std::fill(upstream.begin(), upstream.end(), 0.0);
            upstream[static_cast<std::size_t>(t.actions[static_cast<std::size_t>(i)])] =
                dq[static_cast<std::size_t>(i)];
            agents_.net_for(i).backward(traces[static_cast<std::size_t>(i)], upstream);
        }

        if (joint_) {
            const std::vector<double> x = joint_->encode(t.state, t.actions);
            const std::span<const double> out = joint_->online().forward(x);
            const double e_jt = out[0] - y[k];
            metrics.loss_jt += e_jt * e_jt * inv_m;
            const double g_jt[1] = {2.0 * e_jt * inv_m};
            joint_->online().backward(g_jt);
        }
    }

    if (!std::isfinite(metrics.loss_td) || !std::isfinite(metrics.loss_jt)) {
        throw DivergenceError("non-finite loss at step " + std::to_string(total_steps_) +
                              " (loss_td = " + std::to_string(metrics.loss_td) +
                              ", loss_jt = " + std::to_string(metrics.loss_jt) + ")");
    }

    // The two losses flow into disjoint parameter sets, clipped and updated
    // separately so neither can rescale the other's gradients.
    std::vector<DenseNet*> td_nets = agents_.online_nets();
    if (mixer_) {
        for (DenseNet* net : mixer_->nets()) {
            td_nets.push_back(net);
        }
    }
    metrics.clip_scale_td = clip_grad_norm(td_nets, cfg_.grad_norm_clip);
    for (DenseNet* net : td_nets) {
        rmsprop_step(*net, cfg_.lr, opt_);
    }
    if (joint_) {
        DenseNet* jt_nets[1] = {&joint_->online()};
        metrics.clip_scale_jt = clip_grad_norm(jt_nets, cfg_.grad_norm_clip);
        rmsprop_step(joint_->online(), cfg_.lr, opt_);
    }
    return metrics;
}

double Trainer::run_episode(double epsilon) {
    env_->reset(collect_rng_);
    const int n = env_->n_agents();
    std::vector<int> last_actions(static_cast<std::size_t>(n), -1);
    double episode_return = 0.0;
    bool done = false;
    while (!done) {
        Transition t;
        t.state = env_->global_state();
        t.obs.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            t.obs.push_back(env_->observation(i));
        }
        t.last_actions = last_actions;
        t.actions = select_actions(agents_, t.obs, last_actions, epsilon, collect_rng_);
        const StepResult sr = env_->step(t.actions);
        t.next_state = env_->global_state();
        t.next_obs.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            t.next_obs.push_back(env_->observation(i));
        }
        t.reward = sr.reward;
        t.terminal = sr.terminal;
        episode_return += sr.reward;
        done = sr.terminal;
        last_actions = t.actions;
        buffer_.add(std::move(t));
        ++total_steps_;
    }
    return episode_return;
}

EvalReport Trainer::evaluate(int episodes) {
    if (episodes < 1) {
        throw UsageError("evaluate needs at least one episode");
    }
    const int n = env_->n_agents();
    EvalReport report;
    std::vector<double> returns;
    returns.reserve(static_cast<std::size_t>(episodes));
    for (int e = 0; e < episodes; ++e) {
        env_->reset(eval_rng_);
        std::vector<int> last_actions(static_cast<std::size_t>(n), -1);
        double episode_return = 0.0;
        bool done = false;
        while (!done) {
            std::vector<std::vector<double>> obs;
            obs.reserve(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                obs.push_back(env_->observation(i));
            }
            const std::vector<int> actions =
                greedy_joint_action(agents_, obs, last_actions);
            if (e == 0 && report.greedy_action.empty()) {
                report.greedy_action = actions;
            }
            const StepResult sr = env_->step(actions);
            episode_return += sr.reward;
            done = sr.terminal;
            last_actions = actions;
        }
        returns.push_back(episode_return);
    }
    double mean = 0.0;
    for (double r : returns) {
        mean += r;
    }
    mean /= static_cast<double>(returns.size());
    double var = 0.0;
    for (double r : returns) {
        var += (r - mean) * (r - mean);
    }
    report.mean_return = mean;
    report.std_return = std::sqrt(var / static_cast<double>(returns.size()));

    // Full value tables for the matrix game: the single state makes the
    // probe canonical and directly comparable to the payoff.
    if (auto* mg = dynamic_cast<MatrixGameEnv*>(env_.get())) {
        env_->reset(eval_rng_);
        const std::vector<double> state = env_->global_state();
        const int a = mg->n_actions();
        report.q_vectors.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            report.q_vectors.push_back(
                agents_.individual_q(env_->observation(i), -1, i));
        }
        report.q_jt_table.assign(static_cast<std::size_t>(a),
                                 std::vector<double>(static_cast<std::size_t>(a), 0.0));
        if (joint_) {
            report.q_hat_table.assign(
                static_cast<std::size_t>(a),
                std::vector<double>(static_cast<std::size_t>(a), 0.0));
        }
        for (int a0 = 0; a0 < a; ++a0) {
            for (int a1 = 0; a1 < a; ++a1) {
                const double chosen[2] = {
                    report.q_vectors[0][static_cast<std::size_t>(a0)],
                    report.q_vectors[1][static_cast<std::size_t>(a1)]};
                report.q_jt_table[static_cast<std::size_t>(a0)][static_cast<std::size_t>(a1)] =
                    mixer_ ? mixer_->mix(chosen, state) : sum_mix(chosen);
                if (joint_) {
                    const int joint_action[2] = {a0, a1};
                    report.q_hat_table[static_cast<std::size_t>(a0)]
                                      [static_cast<std::size_t>(a1)] =
                        joint_->joint_q(state, joint_action);
                }
            }
        }
    }
    return report;
}

RunResult Trainer::run() {
    RunResult result;
    TrainMetrics last_metrics;
    long next_eval = 0;
    long next_step_sync = cfg_.target_update_cycle;
    while (true) {
        while (next_eval <= cfg_.n_steps && total_steps_ >= next_eval) {
            EvalReport report = evaluate(cfg_.evaluate_epoch);
            report.step = next_eval;
            report.loss_td = last_metrics.loss_td;
            report.loss_jt = last_metrics.loss_jt;
            report.epsilon = schedule_.at(next_eval);
            result.curve.push_back(std::move(report));
            next_eval += cfg_.evaluate_fre;
        }
        if (total_steps_ >= cfg_.n_steps) {
            break;
        }
        const double epsilon = schedule_.at(total_steps_);
        run_episode(epsilon);
        ++episodes_;
        if (episodes_ % cfg_.train_fre == 0) {
            const auto batch =
                buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), sample_rng_);
            if (batch) {
                last_metrics = train_step(*batch);
            }
        }
        if (cfg_.target_update_unit == UpdateUnit::Episodes) {
            if (episodes_ % cfg_.target_update_cycle == 0) {
                sync_all_targets();
            }
        } else {
            while (total_steps_ >= next_step_sync) {
                sync_all_targets();
                next_step_sync += cfg_.target_update_cycle;
            }
        }
    }
    return result;
}

RunResult train_run(const TrainingConfig& cfg) {
    Trainer trainer(cfg);
    return trainer.run();
}

} // namespace mcvd
