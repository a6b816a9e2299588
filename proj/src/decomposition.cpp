#include "mcvd/decomposition.hpp"

#include <cmath>
#include <string>

#include "mcvd/errors.hpp"

namespace mcvd {

int AgentEncoding::input_dim() const {
    int dim = obs_dim;
    if (use_last_action) dim += n_actions;
    if (shared_network) dim += n_agents;
    return dim;
}

std::vector<double> AgentEncoding::encode(std::span<const double> obs,
                                          int last_action, int agent_id) const {
    if (static_cast<int>(obs.size()) != obs_dim) {
        throw UsageError("observation size " + std::to_string(obs.size()) +
                         " does not match encoding obs_dim " + std::to_string(obs_dim));
    }
    if (agent_id < 0 || agent_id >= n_agents) {
        throw UsageError("agent id " + std::to_string(agent_id) + " outside [0, " +
                         std::to_string(n_agents) + ")");
    }
    if (last_action >= n_actions) {
        throw UsageError("last action " + std::to_string(last_action) +
                         " outside [-1, " + std::to_string(n_actions) + ")");
    }
    std::vector<double> x;
    x.reserve(static_cast<std::size_t>(input_dim()));
    x.assign(obs.begin(), obs.end());
    if (use_last_action) {
        // last_action < 0 marks "episode start": the block stays zero.
        for (int a = 0; a < n_actions; ++a) {
            x.push_back(a == last_action ? 1.0 : 0.0);
        }
    }
    if (shared_network) {
        for (int i = 0; i < n_agents; ++i) {
            x.push_back(i == agent_id ? 1.0 : 0.0);
        }
    }
    return x;
}

AgentQNet::AgentQNet(const AgentEncoding& enc, const std::vector<int>& hidden, Rng& rng)
    : enc_(enc) {
    if (enc_.n_agents < 1 || enc_.n_actions < 1 || enc_.obs_dim < 1) {
        throw ConfigError("agent networks need positive obs_dim, n_actions and n_agents");
    }
    std::vector<LayerSpec> layers;
    for (int width : hidden) {
        layers.push_back({width, Activation::Relu});
    }
    layers.push_back({enc_.n_actions, Activation::Identity});
    const int copies = enc_.shared_network ? 1 : enc_.n_agents;
    online_.reserve(static_cast<std::size_t>(copies));
    for (int i = 0; i < copies; ++i) {
        online_.emplace_back(enc_.input_dim(), layers, rng);
    }
    target_ = online_; // targets start as exact copies
}

DenseNet& AgentQNet::net_for(int agent_id) {
    return online_[enc_.shared_network ? 0 : static_cast<std::size_t>(agent_id)];
}

DenseNet& AgentQNet::target_for(int agent_id) {
    return target_[enc_.shared_network ? 0 : static_cast<std::size_t>(agent_id)];
}

const DenseNet& AgentQNet::net_for(int agent_id) const {
    return online_[enc_.shared_network ? 0 : static_cast<std::size_t>(agent_id)];
}

const DenseNet& AgentQNet::target_for(int agent_id) const {
    return target_[enc_.shared_network ? 0 : static_cast<std::size_t>(agent_id)];
}

std::vector<double> AgentQNet::individual_q(std::span<const double> obs,
                                            int last_action, int agent_id) const {
    const std::vector<double> x = enc_.encode(obs, last_action, agent_id);
    Trace trace;
    net_for(agent_id).forward(x, trace);
    return trace.out;
}

std::vector<double> AgentQNet::individual_q_target(std::span<const double> obs,
                                                   int last_action, int agent_id) const {
    const std::vector<double> x = enc_.encode(obs, last_action, agent_id);
    Trace trace;
    target_for(agent_id).forward(x, trace);
    return trace.out;
}

std::vector<DenseNet*> AgentQNet::online_nets() {
    std::vector<DenseNet*> nets;
    nets.reserve(online_.size());
    for (DenseNet& net : online_) {
        nets.push_back(&net);
    }
    return nets;
}

void AgentQNet::sync_targets() {
    for (std::size_t i = 0; i < online_.size(); ++i) {
        target_[i].copy_parameters_from(online_[i]);
    }
}

int argmax_lowest(std::span<const double> v) {
    if (v.empty()) {
        throw UsageError("argmax of an empty vector");
    }
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) {
            best = i;
        }
    }
    return best;
}

std::vector<int> greedy_joint_action(const AgentQNet& agents,
                                     const std::vector<std::vector<double>>& observations,
                                     std::span<const int> last_actions) {
    const int n = agents.encoding().n_agents;
    if (static_cast<int>(observations.size()) != n ||
        static_cast<int>(last_actions.size()) != n) {
        throw UsageError("greedy_joint_action needs one observation and one last "
                         "action per agent");
    }
    std::vector<int> joint(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(i)] = argmax_lowest(
            agents.individual_q(observations[static_cast<std::size_t>(i)],
                                last_actions[i], i));
    }
    return joint;
}

double sum_mix(std::span<const double> chosen_q) {
    double total = 0.0;
    for (double q : chosen_q) {
        total += q;
    }
    return total;
}

MonotonicMixer::MonotonicMixer(int n_agents, int state_dim, int mix_hidden, Rng& rng)
    : n_agents_(n_agents), state_dim_(state_dim), hidden_(mix_hidden),
      // Weight hypernetworks end in |.| so the mixing weights are >= 0;
      // bias hypernetworks are unconstrained. The scalar output bias gets a
      // small hidden layer of its own.
      hyper_w1_(state_dim, {{mix_hidden * n_agents, Activation::Abs}}, rng),
      hyper_b1_(state_dim, {{mix_hidden, Activation::Identity}}, rng),
      hyper_w2_(state_dim, {{mix_hidden, Activation::Abs}}, rng),
      hyper_b2_(state_dim, {{mix_hidden, Activation::Relu}, {1, Activation::Identity}}, rng) {
    if (n_agents < 1 || state_dim < 1 || mix_hidden < 1) {
        throw ConfigError("mixer needs positive n_agents, state_dim and mix_hidden");
    }
}

double MonotonicMixer::mix(std::span<const double> chosen_q,
                           std::span<const double> state) {
    if (static_cast<int>(chosen_q.size()) != n_agents_) {
        throw UsageError("mixer got " + std::to_string(chosen_q.size()) +
                         " values for " + std::to_string(n_agents_) + " agents");
    }
    q_.assign(chosen_q.begin(), chosen_q.end());
    const std::span<const double> w1 = hyper_w1_.forward(state);
    const std::span<const double> b1 = hyper_b1_.forward(state);
    const std::span<const double> w2 = hyper_w2_.forward(state);
    const std::span<const double> b2 = hyper_b2_.forward(state);
    w1_.assign(w1.begin(), w1.end());
    w2_.assign(w2.begin(), w2.end());
    h_pre_.resize(static_cast<std::size_t>(hidden_));
    h_.resize(static_cast<std::size_t>(hidden_));
    double out = b2[0];
    for (int j = 0; j < hidden_; ++j) {
        double acc = b1[j];
        const double* row = w1_.data() + static_cast<std::size_t>(j) * n_agents_;
        for (int i = 0; i < n_agents_; ++i) {
            acc += row[i] * q_[static_cast<std::size_t>(i)];
        }
        h_pre_[static_cast<std::size_t>(j)] = acc;
        h_[static_cast<std::size_t>(j)] = acc > 0.0 ? acc : 0.0;
        out += w2_[static_cast<std::size_t>(j)] * h_[static_cast<std::size_t>(j)];
    }
    have_forward_ = true;
    return out;
}

std::vector<double> MonotonicMixer::backward(double upstream) {
    if (!have_forward_) {
        throw UsageError("mixer backward called before mix");
    }
    have_forward_ = false;

    // Output bias path.
    const double g_b2[1] = {upstream};
    hyper_b2_.backward(g_b2);

    // Through the mixing layer: dL/dw2_j = g*h_j, dL/dh_j = g*w2_j, then the
    // relu gate, then the first-layer weights/biases and the chosen values.
    std::vector<double> g_w2(static_cast<std::size_t>(hidden_));
    std::vector<double> d_pre(static_cast<std::size_t>(hidden_));
    for (int j = 0; j < hidden_; ++j) {
        g_w2[static_cast<std::size_t>(j)] = upstream * h_[static_cast<std::size_t>(j)];
        const double dh = upstream * w2_[static_cast<std::size_t>(j)];
        d_pre[static_cast<std::size_t>(j)] =
            h_pre_[static_cast<std::size_t>(j)] > 0.0 ? dh : 0.0;
    }
    hyper_w2_.backward(g_w2);
    hyper_b1_.backward(d_pre);

    std::vector<double> g_w1(static_cast<std::size_t>(hidden_) * n_agents_);
    std::vector<double> dq(static_cast<std::size_t>(n_agents_), 0.0);
    for (int j = 0; j < hidden_; ++j) {
        const double d = d_pre[static_cast<std::size_t>(j)];
        for (int i = 0; i < n_agents_; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * n_agents_ + i;
            g_w1[idx] = d * q_[static_cast<std::size_t>(i)];
            dq[static_cast<std::size_t>(i)] += d * w1_[idx];
        }
    }
    hyper_w1_.backward(g_w1);
    return dq;
}

void MonotonicMixer::zero_grad() {
    hyper_w1_.zero_grad();
    hyper_b1_.zero_grad();
    hyper_w2_.zero_grad();
    hyper_b2_.zero_grad();
}

void MonotonicMixer::sync_from(const MonotonicMixer& src) {
    hyper_w1_.copy_parameters_from(src.hyper_w1_);
    hyper_b1_.copy_parameters_from(src.hyper_b1_);
    hyper_w2_.copy_parameters_from(src.hyper_w2_);
    hyper_b2_.copy_parameters_from(src.hyper_b2_);
}

std::vector<DenseNet*> MonotonicMixer::nets() {
    return {&hyper_w1_, &hyper_b1_, &hyper_w2_, &hyper_b2_};
}

JointApproxNet::JointApproxNet(int state_dim, int n_agents, int n_actions,
                               const std::vector<int>& hidden, Rng& rng)
    : state_dim_(state_dim), n_agents_(n_agents), n_actions_(n_actions) {
    if (state_dim < 1 || n_agents < 1 || n_actions < 1) {
        throw ConfigError("joint network needs positive state_dim, n_agents and n_actions");
    }
    std::vector<LayerSpec> layers;
    for (int width : hidden) {
        layers.push_back({width, Activation::Relu});
    }
    layers.push_back({1, Activation::Identity});
    online_ = DenseNet(state_dim + n_agents * n_actions, layers, rng);
    target_ = online_;
}

std::vector<double> JointApproxNet::encode(std::span<const double> state,
                                           std::span<const int> joint_action) const {
    if (static_cast<int>(state.size()) != state_dim_) {
        throw UsageError("state size " + std::to_string(state.size()) +
                         " does not match joint network state_dim " +
                         std::to_string(state_dim_));
    }
    if (static_cast<int>(joint_action.size()) != n_agents_) {
        throw UsageError("joint action needs one entry per agent");
    }
    std::vector<double> x;
    x.reserve(state.size() + static_cast<std::size_t>(n_agents_ * n_actions_));
    x.assign(state.begin(), state.end());
    for (int i = 0; i < n_agents_; ++i) {
        const int a = joint_action[i];
        if (a < 0 || a >= n_actions_) {
            throw UsageError("action index " + std::to_string(a) + " outside [0, " +
                             std::to_string(n_actions_) + ")");
        }
        for (int k = 0; k < n_actions_; ++k) {
            x.push_back(k == a ? 1.0 : 0.0);
        }
    }
    return x;
}

double JointApproxNet::joint_q(std::span<const double> state,
                               std::span<const int> joint_action) const {
    Trace trace;
    online_.forward(encode(state, joint_action), trace);
    return trace.out[0];
}

double JointApproxNet::joint_q_target(std::span<const double> state,
                                      std::span<const int> joint_action) const {
    Trace trace;
    target_.forward(encode(state, joint_action), trace);
    return trace.out[0];
}

void JointApproxNet::sync_targets() {
    target_.copy_parameters_from(online_);
}

double mixer_finite_diff_check(MonotonicMixer& mixer, std::span<const double> chosen_q,
                               std::span<const double> state, double h) {
    if (!(h > 0.0)) {
        throw ConfigError("finite-difference step must be positive");
    }
    mixer.zero_grad();
    mixer.mix(chosen_q, state);
    const std::vector<double> dq = mixer.backward(1.0);

    double worst = 0.0;
    auto track = [&](double analytic, double central) {
        worst = std::max(worst, std::abs(analytic - central) /
                                    std::max(1.0, std::abs(central)));
    };

    // Hypernetwork parameters.
    for (DenseNet* net : mixer.nets()) {
        const std::size_t count = net->parameter_count();
        for (std::size_t p = 0; p < count; ++p) {
            const double saved = net->get_param(p);
            net->set_param(p, saved + h);
            const double up = mixer.mix(chosen_q, state);
            net->set_param(p, saved - h);
            const double down = mixer.mix(chosen_q, state);
            net->set_param(p, saved);
            track(net->get_grad(p), (up - down) / (2.0 * h));
        }
    }

    // Chosen individual values.
    std::vector<double> q(chosen_q.begin(), chosen_q.end());
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double saved = q[i];
        q[i] = saved + h;
        const double up = mixer.mix(q, state);
        q[i] = saved - h;
        const double down = mixer.mix(q, state);
        q[i] = saved;
        track(dq[i], (up - down) / (2.0 * h));
    }
    return worst;
}

bool igm_holds(const AgentQNet& agents, const JointApproxNet& joint,
               std::span<const double> state,
               const std::vector<std::vector<double>>& observations,
               std::span<const int> last_actions, long enumeration_cap) {
    const int n = joint.n_agents();
    const int a = joint.n_actions();
    double combos = 1.0;
    for (int i = 0; i < n; ++i) {
        combos *= a;
        if (combos > static_cast<double>(enumeration_cap)) {
            throw UsageError("joint action space exceeds the enumeration cap of " +
                             std::to_string(enumeration_cap));
        }
    }
    const std::vector<int> greedy = greedy_joint_action(agents, observations, last_actions);

    // Odometer over all joint actions; keep the first maximizer, which is
    // also the lexicographically lowest (matching argmax tie-breaking).
    std::vector<int> current(static_cast<std::size_t>(n), 0);
    std::vector<int> best = current;
    double best_q = joint.joint_q(state, current);
    while (true) {
        int pos = n - 1;
        while (pos >= 0) {
            if (++current[static_cast<std::size_t>(pos)] < a) break;
            current[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        const double q = joint.joint_q(state, current);
        if (q > best_q) {
            best_q = q;
            best = current;
        }
    }
    return best == greedy;
}

} // namespace mcvd
