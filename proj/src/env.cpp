#include "seal/env.hpp"

#include <utility>

namespace seal {

EpisodeTrace run_episode(Environment& env, const Policy& policy, long max_steps) {
    EpisodeTrace trace;
    if (max_steps <= 0) return trace;
    State state = env.reset();
    for (long t = 0; t < max_steps; ++t) {
        const int action = policy(state);
        StepOutcome out = env.step(action);
        trace.transitions.push_back({state, action, out.reward, out.next_state, out.done});
        trace.total_reward += out.reward;
        ++trace.length;
        if (out.done) break;
        state = std::move(out.next_state);
    }
    return trace;
}

}  // namespace seal
