#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "seal/env.hpp"

namespace seal {

enum class AngleUnits { Degrees, Radians };

struct NamedState {
    std::string name;
    std::vector<double> values;
};

// Link transition: from state `from`, the unique correct action `action`
// leads to state `to` and earns +c. Indices refer to WatermarkSpec::states.
struct WatermarkLink {
    int from = 0;
    int action = 0;
    int to = 0;
};

// Declarative description of the watermark environment: a handful of crafted
// states disjoint from the main task's observation space, linked into an
// identifier sequence. Immutable after construction and safely shareable.
struct WatermarkSpec {
    int state_dim = 0;
    std::vector<NamedState> states;  // non-terminal states
    std::vector<WatermarkLink> links;
    NamedState terminal;
    double reward_magnitude = 1.0;  // c
    long episode_cap = 0;           // N_max
    int initial_state = 0;          // index into states
    AngleUnits angle_units = AngleUnits::Radians;
};

// The four-state CartPole watermark: states State[1..4] and Terminal with
// angle coordinates in degrees, links (State[i], Actions[i%2]) -> State[i%4+1],
// c = 1, cap 500, initial state State[1].
WatermarkSpec default_cartpole_spec();

// Spec states in the unit the environments operate in: when the spec carries
// degrees, coordinates 2 and 3 (pole angle and tip velocity) are converted to
// radians. Degree specs are only defined for 4-dimensional states.
std::vector<State> internal_states(const WatermarkSpec& spec);
State internal_terminal(const WatermarkSpec& spec);

// Pass/fail per joint-MDP condition:
//   1 state spaces disjoint          2 state dimensions equal
//   3 action spaces equal            4 deterministic dynamics, rewards +-c
//   5 equal episode step cap
struct ValidationReport {
    std::array<bool, 5> condition_pass{false, false, false, false, false};
    std::vector<std::string> violations;
    bool pass() const;
};

ValidationReport validate(const WatermarkSpec& spec, const EnvMeta& main_meta);

struct LoopDescriptor {
    std::vector<int> cycle;  // ordered state indices; closed (last links back to first)
    int length = 0;
    int pivot = 0;  // the state that both opens and closes the loop
};

// The unique cycle reachable from the initial state, or nullopt for a chain
// that never returns (such a spec would need cap-length identifier chains).
std::optional<LoopDescriptor> detect_loop(const WatermarkSpec& spec);

// log P(a uniform-random policy completes a full episode): every state has
// exactly one correct action, so this is episode_cap * log(1/action_count).
double accidental_match_log_prob(const WatermarkSpec& spec, int action_count);

// Runnable deterministic environment compiled from a spec. Correct actions
// walk the links for +c; anything else drops into the terminal state with -c
// and ends the episode. done is also reported once the step cap is reached.
class WatermarkEnv final : public Environment {
public:
    WatermarkEnv(const WatermarkSpec& spec, int action_count);

    const EnvMeta& meta() const override { return meta_; }
    State reset() override;
    StepOutcome step(int action) override;

private:
    std::vector<State> states_;
    State terminal_;
    std::vector<int> correct_action_;  // a_w per state index
    std::vector<int> next_index_;
    EnvMeta meta_;
    long episode_cap_;
    double reward_;
    int initial_;
    int current_ = 0;
    long steps_ = 0;
    bool needs_reset_ = true;
};

// Throws std::runtime_error when the spec is structurally invalid.
std::unique_ptr<WatermarkEnv> build_env(const WatermarkSpec& spec, int action_count);

// JSON spec file, version 1. Unknown fields are rejected.
std::string spec_to_json(const WatermarkSpec& spec);
WatermarkSpec spec_from_json(const std::string& text);
void save_spec(const WatermarkSpec& spec, const std::string& path);
WatermarkSpec load_spec(const std::string& path);

}  // namespace seal
