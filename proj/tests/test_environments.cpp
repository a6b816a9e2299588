#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "mcvd/env.hpp"
#include "mcvd/errors.hpp"
#include "mcvd/rng.hpp"

using namespace mcvd;

namespace {

const std::vector<std::vector<double>> kDiagnosticPayoff{
    {8.0, -12.0, -12.0},
    {-12.0, 6.0, 6.0},
    {-12.0, 6.0, 6.0},
};

// Discrete action indices shared by the grid and particle environments.
constexpr int kStill = 0;
constexpr int kUp = 1;
constexpr int kDown = 2;
constexpr int kLeft = 3;
constexpr int kRight = 4;

} // namespace

TEST_CASE("matrix game payoff lookup") {
    MatrixGameEnv env(kDiagnosticPayoff);
    Rng rng(1);

    CHECK(env.n_agents() == 2);
    CHECK(env.n_actions() == 3);
    CHECK(env.state_dim() == 1);
    CHECK(env.obs_dim() == 1);

    struct Probe {
        int a0, a1;
        double reward;
    };
    for (const Probe& p : {Probe{0, 0, 8.0}, Probe{0, 1, -12.0}, Probe{1, 2, 6.0},
                           Probe{2, 0, -12.0}, Probe{2, 2, 6.0}}) {
        env.reset(rng);
        const std::vector<int> joint{p.a0, p.a1};
        const StepResult r = env.step(joint);
        CHECK(r.reward == p.reward);
        CHECK(r.terminal); // every episode lasts exactly one step
    }
}

TEST_CASE("matrix game state, observations, and errors") {
    MatrixGameEnv env(kDiagnosticPayoff);
    Rng rng(1);
    env.reset(rng);

    CHECK(env.global_state() == std::vector<double>{0.0});
    CHECK(env.observation(0) == std::vector<double>{0.0});
    CHECK(env.observation(1) == std::vector<double>{0.0});
    CHECK_THROWS_AS(env.observation(2), UsageError);
    CHECK(env.available_actions(0) == std::vector<bool>(3, true));

    const std::vector<int> bad_index{3, 0};
    CHECK_THROWS_AS(env.step(bad_index), UsageError);
    const std::vector<int> bad_count{0};
    CHECK_THROWS_AS(env.step(bad_count), UsageError);

    const std::vector<int> ok{0, 0};
    env.step(ok);
    CHECK_THROWS_AS(env.step(ok), UsageError); // finished episode

    env.reset(rng);
    CHECK(env.step(ok).reward == 8.0); // reset makes it playable again

    CHECK_THROWS_AS(MatrixGameEnv({{1.0, 2.0}, {3.0}}), ConfigError);
    CHECK_THROWS_AS(MatrixGameEnv({}), ConfigError);
}

TEST_CASE("grid navigation reproduces the four reference probes") {
    // Default layout: 2x3 grid, agent A at (0,1), agent B at (1,1),
    // landmarks at (0,0) and (1,2).
    GridNavEnv env;
    Rng rng(1);

    SUBCASE("A down onto B: collision, revert") {
        env.reset(rng);
        const std::vector<int> joint{kDown, kStill};
        const StepResult r = env.step(joint);
        CHECK(r.reward == -10.0);
        CHECK(env.positions()[0] == std::pair<int, int>{0, 1});
        CHECK(env.positions()[1] == std::pair<int, int>{1, 1});
    }
    SUBCASE("A down, B left: net zero") {
        env.reset(rng);
        const std::vector<int> joint{kDown, kLeft};
        CHECK(env.step(joint).reward == 0.0);
        CHECK(env.positions()[0] == std::pair<int, int>{1, 1});
        CHECK(env.positions()[1] == std::pair<int, int>{1, 0});
    }
    SUBCASE("A left toward the first landmark: +1") {
        env.reset(rng);
        const std::vector<int> joint{kLeft, kStill};
        CHECK(env.step(joint).reward == 1.0);
        CHECK(env.positions()[0] == std::pair<int, int>{0, 0});
    }
    SUBCASE("both left: gain on one landmark, loss on the other") {
        env.reset(rng);
        const std::vector<int> joint{kLeft, kLeft};
        CHECK(env.step(joint).reward == 0.0);
    }
}

TEST_CASE("grid navigation collision details") {
    SUBCASE("swapping cells counts as a collision") {
        GridNavSpec spec;
        spec.agent_cells = {{0, 0}, {0, 1}};
        GridNavEnv env(spec);
        Rng rng(1);
        env.reset(rng);
        const std::vector<int> joint{kRight, kLeft};
        const StepResult r = env.step(joint);
        CHECK(r.reward == -10.0);
        CHECK(env.positions()[0] == std::pair<int, int>{0, 0});
        CHECK(env.positions()[1] == std::pair<int, int>{0, 1});
    }
    SUBCASE("three agents converging: one penalty per pair") {
        GridNavSpec spec;
        spec.agent_cells = {{0, 0}, {0, 1}, {0, 2}};
        GridNavEnv env(spec);
        Rng rng(1);
        env.reset(rng);
        const std::vector<int> joint{kRight, kStill, kLeft};
        CHECK(env.step(joint).reward == -30.0);
        CHECK(env.positions()[0] == std::pair<int, int>{0, 0});
        CHECK(env.positions()[2] == std::pair<int, int>{0, 2});
    }
    SUBCASE("collision reward is symmetric under agent relabeling") {
        GridNavSpec forward;
        forward.agent_cells = {{0, 1}, {1, 1}};
        GridNavSpec reversed;
        reversed.agent_cells = {{1, 1}, {0, 1}};
        GridNavEnv a(forward), b(reversed);
        Rng rng(1);
        a.reset(rng);
        b.reset(rng);
        const std::vector<int> ja{kDown, kStill};
        const std::vector<int> jb{kStill, kDown};
        CHECK(a.step(ja).reward == b.step(jb).reward);
    }
    SUBCASE("distance reward is symmetric under agent relabeling") {
        GridNavSpec forward;
        forward.agent_cells = {{0, 1}, {1, 1}};
        GridNavSpec reversed;
        reversed.agent_cells = {{1, 1}, {0, 1}};
        GridNavEnv a(forward), b(reversed);
        Rng rng(1);
        a.reset(rng);
        b.reset(rng);
        const std::vector<int> ja{kLeft, kStill};
        const std::vector<int> jb{kStill, kLeft};
        CHECK(a.step(ja).reward == 1.0);
        CHECK(b.step(jb).reward == 1.0);
    }
}

TEST_CASE("grid navigation geometry and encoding") {
    GridNavEnv env;
    Rng rng(1);
    env.reset(rng);

    CHECK(env.n_agents() == 2);
    CHECK(env.n_actions() == 5);
    CHECK(env.state_dim() == 12);
    CHECK(env.obs_dim() == 8);

    SUBCASE("state is one-hot agent cells") {
        const std::vector<double> state = env.global_state();
        REQUIRE(state.size() == 12);
        double total = 0.0;
        for (double v : state) total += v;
        CHECK(total == 2.0);
        CHECK(state[1] == 1.0);  // agent A at cell (0,1) of the 2x3 grid
        CHECK(state[10] == 1.0); // agent B block offset 6, cell (1,1)
    }
    SUBCASE("observation layout: own cell, landmark offsets, peer offsets") {
        const std::vector<double> obs = env.observation(0);
        const std::vector<double> want{0.0, 0.5, 0.0, -0.5, 1.0, 0.5, 1.0, 0.0};
        REQUIRE(obs.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(obs[i] == doctest::Approx(want[i]).epsilon(1e-15));
        }
    }
    SUBCASE("moves off the edge clamp in place") {
        const std::vector<int> joint{kUp, kStill};
        CHECK(env.step(joint).reward == 0.0);
        CHECK(env.positions()[0] == std::pair<int, int>{0, 1});
    }
    SUBCASE("episode terminates exactly at the limit") {
        const std::vector<int> still{kStill, kStill};
        for (int t = 0; t < 24; ++t) {
            CHECK_FALSE(env.step(still).terminal);
        }
        CHECK(env.step(still).terminal);
        CHECK_THROWS_AS(env.step(still), UsageError);
    }
    SUBCASE("invalid construction") {
        GridNavSpec bad;
        bad.agent_cells = {{0, 0}, {0, 0}};
        CHECK_THROWS_AS(GridNavEnv{bad}, ConfigError);
        GridNavSpec outside;
        outside.agent_cells = {{5, 5}};
        CHECK_THROWS_AS(GridNavEnv{outside}, ConfigError);
    }
}

TEST_CASE("particle navigation dimensions and reset") {
    ParticleNavEnv env;
    CHECK(env.n_agents() == 3);
    CHECK(env.n_actions() == 5);
    CHECK(env.obs_dim() == 14);
    CHECK(env.state_dim() == 18);

    SUBCASE("reset samples inside the arena with zero velocity") {
        Rng rng(42);
        env.reset(rng);
        const std::vector<double> state = env.global_state();
        REQUIRE(state.size() == 18);
        for (int i = 0; i < 3; ++i) {
            CHECK(state[4 * i] >= -1.0);     // px
            CHECK(state[4 * i] <= 1.0);
            CHECK(state[4 * i + 1] >= -1.0); // py
            CHECK(state[4 * i + 1] <= 1.0);
            CHECK(state[4 * i + 2] == 0.0);  // vx
            CHECK(state[4 * i + 3] == 0.0);  // vy
        }
        for (int l = 0; l < 3; ++l) {
            CHECK(std::abs(state[12 + 2 * l]) <= 1.0);
            CHECK(std::abs(state[13 + 2 * l]) <= 1.0);
        }
    }
    SUBCASE("equal seeds reproduce the initial scene") {
        ParticleNavEnv a, b;
        Rng ra(7), rb(7);
        a.reset(ra);
        b.reset(rb);
        CHECK(a.global_state() == b.global_state());
        Rng rc(8);
        b.reset(rc);
        CHECK(a.global_state() != b.global_state());
    }
    SUBCASE("observation layout") {
        Rng rng(3);
        env.reset(rng);
        const std::vector<double> s = env.global_state();
        const std::vector<double> obs = env.observation(1);
        REQUIRE(obs.size() == 14);
        CHECK(obs[0] == s[4]); // own px
        CHECK(obs[1] == s[5]); // own py
        CHECK(obs[2] == 0.0);  // own vx
        CHECK(obs[3] == 0.0);  // own vy
        // First landmark offset.
        CHECK(obs[4] == doctest::Approx(s[12] - s[4]).epsilon(1e-15));
        CHECK(obs[5] == doctest::Approx(s[13] - s[5]).epsilon(1e-15));
        // First peer offset (agent 0 relative to agent 1).
        CHECK(obs[10] == doctest::Approx(s[0] - s[4]).epsilon(1e-15));
        CHECK(obs[11] == doctest::Approx(s[1] - s[5]).epsilon(1e-15));
    }
}

TEST_CASE("particle navigation reward closed forms") {
    SUBCASE("perfect coverage scores exactly zero") {
        ParticleNavEnv env;
        const std::vector<std::pair<double, double>> spots{
            {-0.8, -0.8}, {0.0, 0.8}, {0.8, -0.8}};
        env.set_layout(spots, spots);
        const std::vector<int> still{kStill, kStill, kStill};
        CHECK(env.step(still).reward == 0.0);
    }
    SUBCASE("one overlapping pair with known distances") {
        ParticleNavSpec spec;
        spec.n_agents = 2;
        ParticleNavEnv env(spec);
        const std::vector<std::pair<double, double>> agents{{0.0, 0.0}, {0.05, 0.0}};
        const std::vector<std::pair<double, double>> landmarks{{0.5, 0.0}, {-0.5, 0.0}};
        env.set_layout(agents, landmarks);
        const std::vector<int> still{kStill, kStill};
        // Landmark 1: nearest agent is at 0.45; landmark 2: nearest at 0.5.
        const double want = (-0.45 - 0.5 - 10.0) / 2.0;
        CHECK(env.step(still).reward == doctest::Approx(want).epsilon(1e-12));
    }
    SUBCASE("reward is invariant under agent permutation") {
        const std::vector<std::pair<double, double>> landmarks{
            {0.3, 0.3}, {-0.4, 0.1}, {0.0, -0.6}};
        const std::vector<std::pair<double, double>> agents{
            {0.1, 0.2}, {-0.2, -0.3}, {0.5, -0.5}};
        std::vector<std::pair<double, double>> rotated{agents[1], agents[2], agents[0]};

        ParticleNavEnv a, b;
        a.set_layout(agents, landmarks);
        b.set_layout(rotated, landmarks);
        const std::vector<int> still{kStill, kStill, kStill};
        CHECK(a.step(still).reward == doctest::Approx(b.step(still).reward).epsilon(1e-12));
    }
    SUBCASE("rewards never exceed zero on random rollouts") {
        ParticleNavEnv env;
        Rng rng(99);
        for (int episode = 0; episode < 8; ++episode) {
            env.reset(rng);
            bool terminal = false;
            while (!terminal) {
                std::vector<int> joint(3);
                for (int& a : joint) a = rng.uniform_int(5);
                const StepResult r = env.step(joint);
                CHECK(r.reward <= 0.0);
                terminal = r.terminal;
            }
        }
    }
}

TEST_CASE("particle navigation dynamics") {
    ParticleNavSpec spec;
    spec.n_agents = 1;
    ParticleNavEnv env(spec);
    const std::vector<std::pair<double, double>> agent{{0.0, 0.0}};
    const std::vector<std::pair<double, double>> landmark{{1.0, 0.0}};

    SUBCASE("damped velocity integration") {
        env.set_layout(agent, landmark);
        const std::vector<int> right{kRight};
        // v = 0.75*0 + 5*1*0.1 = 0.5; p = 0 + 0.5*0.1 = 0.05.
        CHECK(env.step(right).reward == doctest::Approx(-0.95).epsilon(1e-12));
        const std::vector<int> still{kStill};
        // v = 0.75*0.5 = 0.375; p = 0.05 + 0.0375 = 0.0875.
        CHECK(env.step(still).reward == doctest::Approx(-0.9125).epsilon(1e-12));
        const std::vector<double> s = env.global_state();
        CHECK(s[0] == doctest::Approx(0.0875).epsilon(1e-12)); // px
        CHECK(s[2] == doctest::Approx(0.375).epsilon(1e-12));  // vx
    }
    SUBCASE("positions clamp at the arena wall") {
        const std::vector<std::pair<double, double>> at_wall{{1.0, 0.0}};
        env.set_layout(at_wall, landmark);
        const std::vector<int> right{kRight};
        env.step(right);
        CHECK(env.global_state()[0] == 1.0);
    }
    SUBCASE("up accelerates along positive y") {
        env.set_layout(agent, landmark);
        const std::vector<int> up{kUp};
        env.step(up);
        const std::vector<double> s = env.global_state();
        CHECK(s[1] == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(s[0] == 0.0);
    }
    SUBCASE("episode limit and finished-episode guard") {
        env.set_layout(agent, landmark);
        const std::vector<int> still{kStill};
        for (int t = 0; t < 24; ++t) {
            CHECK_FALSE(env.step(still).terminal);
        }
        CHECK(env.step(still).terminal);
        CHECK_THROWS_AS(env.step(still), UsageError);
    }
    SUBCASE("layout validation") {
        const std::vector<std::pair<double, double>> two{{0.0, 0.0}, {0.5, 0.5}};
        CHECK_THROWS_AS(env.set_layout(two, landmark), UsageError);
        const std::vector<std::pair<double, double>> outside{{2.0, 0.0}};
        CHECK_THROWS_AS(env.set_layout(outside, landmark), UsageError);
    }
    SUBCASE("invalid construction") {
        ParticleNavSpec bad;
        bad.n_agents = 0;
        CHECK_THROWS_AS(ParticleNavEnv{bad}, ConfigError);
        ParticleNavSpec neg_dt;
        neg_dt.dt = 0.0;
        CHECK_THROWS_AS(ParticleNavEnv{neg_dt}, ConfigError);
    }
}
