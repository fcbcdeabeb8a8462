#pragma once

#include <functional>
#include <memory>
#include <vector>

namespace seal {

// Observation vector. Dimension is fixed per environment and every entry is
// finite for any state an environment emits.
using State = std::vector<double>;

// Per-coordinate observation bounds; unbounded coordinates use +-infinity.
struct Interval {
    double lo;
    double hi;
};

struct EnvMeta {
    int state_dim = 0;
    int action_count = 0;
    long max_steps = 0;  // N_max, shared episode step cap
    std::vector<Interval> observation_bounds;
};

struct StepOutcome {
    State next_state;
    double reward = 0.0;
    bool done = false;
};

struct Transition {
    State state;
    int action = 0;
    double reward = 0.0;
    State next_state;
    bool done = false;
};

struct EpisodeTrace {
    std::vector<Transition> transitions;
    double total_reward = 0.0;
    long length = 0;
};

enum class Execution { Serial, Parallel };

// Episodic environment with a discrete action space. An instance is driven
// by at most one logical thread at a time; independent instances may run
// concurrently. step() throws std::invalid_argument for an out-of-range
// action and std::logic_error when called before reset() or after the
// episode finished. The environment itself reports done at its step cap.
class Environment {
public:
    virtual ~Environment() = default;
    virtual const EnvMeta& meta() const = 0;
    virtual State reset() = 0;
    virtual StepOutcome step(int action) = 0;
};

using Policy = std::function<int(const State&)>;

// Runs one episode under the given policy, for at most max_steps steps.
EpisodeTrace run_episode(Environment& env, const Policy& policy, long max_steps);

}  // namespace seal
