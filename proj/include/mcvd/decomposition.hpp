#pragma once

#include <span>
#include <vector>

#include "mcvd/nn.hpp"

namespace mcvd {

// Input layout of the individual action-value networks:
//   observation ++ one-hot last action ++ one-hot agent id.
// The last-action block is all zeros on the first step of an episode
// (last_action = -1). The id block is only present when one network is
// shared across agents.
struct AgentEncoding {
    int obs_dim = 0;
    int n_actions = 0;
    int n_agents = 0;
    bool use_last_action = true;
    bool shared_network = true;

    int input_dim() const;
    std::vector<double> encode(std::span<const double> obs, int last_action,
                               int agent_id) const;
};

// Per-agent action-value networks with paired target copies. With a shared
// network all agents evaluate the same parameters (distinguished by the id
// one-hot); otherwise each agent owns an independent network.
class AgentQNet {
public:
    AgentQNet(const AgentEncoding& enc, const std::vector<int>& hidden, Rng& rng);

    const AgentEncoding& encoding() const { return enc_; }

    // Q-vector of length n_actions from the online (or target) parameters.
    std::vector<double> individual_q(std::span<const double> obs, int last_action,
                                     int agent_id) const;
    std::vector<double> individual_q_target(std::span<const double> obs,
                                            int last_action, int agent_id) const;

    DenseNet& net_for(int agent_id);
    DenseNet& target_for(int agent_id);
    const DenseNet& net_for(int agent_id) const;
    const DenseNet& target_for(int agent_id) const;

    // Online parameter sets for the optimizer / gradient clipping; one entry
    // when the network is shared.
    std::vector<DenseNet*> online_nets();

    void sync_targets();

private:
    AgentEncoding enc_;
    std::vector<DenseNet> online_;
    std::vector<DenseNet> target_;
};

// Index of the largest entry; ties break toward the lowest index.
int argmax_lowest(std::span<const double> v);

// Per-agent independent greedy joint action from the online networks.
std::vector<int> greedy_joint_action(const AgentQNet& agents,
                                     const std::vector<std::vector<double>>& observations,
                                     std::span<const int> last_actions);

// Q_jt as the plain sum of the chosen individual values.
double sum_mix(std::span<const double> chosen_q);

// Monotonic mixing network (ablation): a one-hidden-layer mixing net over
// the chosen individual values whose weights and biases are produced by
// hypernetworks conditioned on the global state. The weight hypernetworks
// end in an absolute-value activation, so every mixing weight is
// non-negative and dQ_jt/dQ_i >= 0 by construction.
class MonotonicMixer {
public:
    MonotonicMixer(int n_agents, int state_dim, int mix_hidden, Rng& rng);

    // Forward pass; caches everything backward(upstream) needs.
    double mix(std::span<const double> chosen_q, std::span<const double> state);

    // Backpropagates dL/dQ_jt through the latest mix call: accumulates
    // hypernetwork gradients and returns dL/dQ_i per agent.
    std::vector<double> backward(double upstream);

    void zero_grad();
    void sync_from(const MonotonicMixer& src);
    std::vector<DenseNet*> nets();

    int n_agents() const { return n_agents_; }

private:
    int n_agents_ = 0;
    int state_dim_ = 0;
    int hidden_ = 0;
    DenseNet hyper_w1_, hyper_b1_, hyper_w2_, hyper_b2_;
    std::vector<double> q_, w1_, w2_, h_pre_, h_;
    bool have_forward_ = false;
};

// Centralized joint action-value approximation: maps the global state and
// the one-hot encoded joint action to a scalar estimate; paired target copy.
class JointApproxNet {
public:
    JointApproxNet(int state_dim, int n_agents, int n_actions,
                   const std::vector<int>& hidden, Rng& rng);

    std::vector<double> encode(std::span<const double> state,
                               std::span<const int> joint_action) const;

    double joint_q(std::span<const double> state, std::span<const int> joint_action) const;
    double joint_q_target(std::span<const double> state,
                          std::span<const int> joint_action) const;

    DenseNet& online() { return online_; }
    DenseNet& target() { return target_; }

    int n_agents() const { return n_agents_; }
    int n_actions() const { return n_actions_; }

    void sync_targets();

private:
    int state_dim_ = 0;
    int n_agents_ = 0;
    int n_actions_ = 0;
    DenseNet online_;
    DenseNet target_;
};

// Finite-difference audit of the mixer: compares the analytic gradients of
// mix() with respect to every hypernetwork parameter and every chosen value
// against central differences. Returns the maximum relative error
// |analytic - central| / max(1, |central|).
double mixer_finite_diff_check(MonotonicMixer& mixer, std::span<const double> chosen_q,
                               std::span<const double> state, double h = 1e-4);

// True iff the combination of per-agent greedy actions also maximizes the
// joint approximation network over the full joint action space (exhaustive
// enumeration). Throws UsageError when |A|^N exceeds enumeration_cap.
bool igm_holds(const AgentQNet& agents, const JointApproxNet& joint,
               std::span<const double> state,
               const std::vector<std::vector<double>>& observations,
               std::span<const int> last_actions,
               long enumeration_cap = 1000000);

} // namespace mcvd
