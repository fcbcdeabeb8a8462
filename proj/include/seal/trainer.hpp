#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "seal/dqn.hpp"
#include "seal/env.hpp"

namespace seal {

enum class Phase { Main, Watermark };

const char* phase_name(Phase phase);

// Episode counts after which training switches main -> watermark (f_MW) and
// watermark -> main (f_WM). The symmetric alternation of period f_E is the
// special case main_episodes == watermark_episodes.
struct AlternationSchedule {
    int main_episodes = 10;
    int watermark_episodes = 1;
};

// Pure phase automaton: switch once the current phase has run its share of
// episodes. Counters reset on switch (the trainer owns them).
Phase next_phase(const AlternationSchedule& schedule, Phase current, int episodes_in_phase);

struct EpisodeRecord {
    long episode = 0;  // 1-based global episode index
    Phase phase = Phase::Main;
    double total_reward = 0.0;
    long length = 0;
    double epsilon = 0.0;  // at episode end
    long global_step = 0;  // at episode end
};

struct TrainingLog {
    std::vector<EpisodeRecord> episodes;

    void write_csv(std::ostream& out) const;
    void write_csv_file(const std::string& path) const;
    static TrainingLog read_csv(std::istream& in);
    static TrainingLog read_csv_file(const std::string& path);
};

struct TrainingFault : std::runtime_error {
    TrainingLog log;
    TrainingFault(const std::string& message, TrainingLog partial)
        : std::runtime_error(message), log(std::move(partial)) {}
};

// The joint MDP: the main task plus the watermark environment, alternating on
// the schedule. Disjoint state spaces make dispatch-by-phase equivalent to
// dispatch-by-state-membership. watermark_env may be null for a nominal run.
struct JointMdp {
    Environment& main_env;
    Environment* watermark_env = nullptr;
    AlternationSchedule schedule;
};

struct TrainResult {
    mlp::Network network;
    TrainingLog log;
};

// DQN training over the joint MDP: one shared replay buffer, one policy,
// episodes alternating per the schedule, until the global step budget is
// exhausted (the final episode runs to completion).
TrainResult train(const JointMdp& joint, const Hyperparams& hp);

using PolicyFactory = std::function<Policy(std::uint64_t seed)>;
using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t seed)>;

struct EvalResult {
    double mean_reward = 0.0;
    std::vector<double> episode_rewards;
};

// Mean total reward over exactly `episodes` fresh episodes. Episodes run in
// parallel when exec is Parallel, each worker with its own environment
// instance; results are reduced in episode order, so the outcome does not
// depend on the thread count.
EvalResult evaluate(const PolicyFactory& policy_factory, const EnvFactory& env_factory,
                    int episodes, std::uint64_t seed, Execution exec = Execution::Parallel);

// Greedy policy over a frozen copy of the network (exploration disabled).
PolicyFactory greedy_policy(const mlp::Network& net);

PolicyFactory uniform_random_policy(int action_count);

}  // namespace seal
