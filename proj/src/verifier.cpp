#include "seal/verifier.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace seal {

const char* verdict_name(Verdict verdict) {
    switch (verdict) {
        case Verdict::Match: return "match";
        case Verdict::Suspect: return "suspect";
        case Verdict::NoMatch: return "no-match";
    }
    return "no-match";
}

namespace {

int state_index(const std::vector<State>& states, const State& value) {
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i] == value) return static_cast<int>(i);
    return -1;
}

}  // namespace

double trajectory_match(const EpisodeTrace& trace, const WatermarkSpec& spec,
                        const LoopDescriptor& loop) {
    if (trace.transitions.empty()) return 0.0;
    const auto states = internal_states(spec);

    // a_w and destination per loop state.
    std::vector<int> loop_action(states.size(), -1);
    std::vector<int> loop_next(states.size(), -1);
    for (int k = 0; k < loop.length; ++k) {
        const int from = loop.cycle[k];
        const int to = loop.cycle[(k + 1) % loop.length];
        for (const auto& link : spec.links)
            if (link.from == from && link.to == to) loop_action[from] = link.action;
        loop_next[from] = to;
    }

    long matched = 0;
    for (const auto& t : trace.transitions) {
        const int from = state_index(states, t.state);
        if (from < 0 || loop_next[from] < 0) continue;
        if (t.action == loop_action[from] && t.next_state == states[loop_next[from]]) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(trace.transitions.size());
}

VerificationReport verify(const PolicyFactory& policy_factory, const WatermarkSpec& spec,
                          const VerifierConfig& config, int action_count,
                          const std::string& spec_name) {
    if (config.episodes < 1) throw std::invalid_argument("verify: episodes must be >= 1");
    const double perfect = spec.reward_magnitude * static_cast<double>(spec.episode_cap);

    VerificationReport report;
    report.spec_name = spec_name;
    report.theta_match = config.theta_match.value_or(0.9 * perfect);
    report.theta_reject = config.theta_reject.value_or(0.1 * perfect);
    if (report.theta_reject >= report.theta_match)
        throw std::invalid_argument("verify: theta_reject must be below theta_match");

    const auto loop = detect_loop(spec);
    auto env = build_env(spec, action_count);

    long total_steps = 0;
    double matched_steps = 0.0;
    double reward_sum = 0.0;
    for (int e = 0; e < config.episodes; ++e) {
        Policy policy = policy_factory(derive_seed(0x5eedull, static_cast<std::uint64_t>(e)));
        EpisodeTrace trace = run_episode(*env, policy, spec.episode_cap);
        reward_sum += trace.total_reward;
        report.per_episode_rewards.push_back(trace.total_reward);
        bool perfect_episode = trace.length == spec.episode_cap;
        for (const auto& t : trace.transitions)
            if (t.reward < 0.0) perfect_episode = false;
        if (perfect_episode) ++report.perfect_episodes;
        if (loop) matched_steps += trajectory_match(trace, spec, *loop) * trace.length;
        total_steps += trace.length;
    }

    report.episodes_run = config.episodes;
    report.mean_reward = reward_sum / config.episodes;
    report.trajectory_match_fraction =
        total_steps > 0 ? matched_steps / static_cast<double>(total_steps) : 0.0;
    if (report.mean_reward >= report.theta_match)
        report.verdict = Verdict::Match;
    else if (report.mean_reward <= report.theta_reject)
        report.verdict = Verdict::NoMatch;
    else
        report.verdict = Verdict::Suspect;
    return report;
}

VerificationReport verify(const mlp::Network& net, const WatermarkSpec& spec,
                          const VerifierConfig& config, const std::string& spec_name) {
    if (net.input_dim != spec.state_dim)
        throw std::invalid_argument("verify: network input dimension " +
                                    std::to_string(net.input_dim) +
                                    " does not match the spec's state dimension " +
                                    std::to_string(spec.state_dim));
    return verify(greedy_policy(net), spec, config, net.output_dim, spec_name);
}

std::string report_to_json(const VerificationReport& report) {
    nlohmann::json j;
    j["config"] = {{"episodes", report.episodes_run},
                   {"theta_match", report.theta_match},
                   {"theta_reject", report.theta_reject}};
    j["episodes_run"] = report.episodes_run;
    j["per_episode_rewards"] = report.per_episode_rewards;
    j["mean_reward"] = report.mean_reward;
    j["perfect_episodes"] = report.perfect_episodes;
    j["trajectory_match_fraction"] = report.trajectory_match_fraction;
    j["verdict"] = verdict_name(report.verdict);
    j["spec_name"] = report.spec_name;
    return j.dump(2) + "\n";
}

void write_report(const VerificationReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << report_to_json(report);
    if (!out) throw std::runtime_error("failed to write report to '" + path + "'");
}

}  // namespace seal
