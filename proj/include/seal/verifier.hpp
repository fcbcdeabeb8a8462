#pragma once

#include <optional>
#include <string>

#include "seal/trainer.hpp"
#include "seal/watermark.hpp"

namespace seal {

enum class Verdict { Match, Suspect, NoMatch };

const char* verdict_name(Verdict verdict);

// Thresholds are mean-reward bands; when unset they default to 0.9 and 0.1
// times the perfect score c * episode_cap.
struct VerifierConfig {
    int episodes = 100;
    std::optional<double> theta_match;
    std::optional<double> theta_reject;
};

struct VerificationReport {
    int episodes_run = 0;
    std::vector<double> per_episode_rewards;
    double mean_reward = 0.0;
    int perfect_episodes = 0;                  // full-cap episodes with no failure step
    double trajectory_match_fraction = 0.0;    // link transitions / all transitions
    Verdict verdict = Verdict::NoMatch;
    double theta_match = 0.0;                  // resolved thresholds
    double theta_reject = 0.0;
    std::string spec_name;
};

// Fraction of the trace's transitions that are link transitions of the
// identifier loop.
double trajectory_match(const EpisodeTrace& trace, const WatermarkSpec& spec,
                        const LoopDescriptor& loop);

// Runs the suspect policy for consecutive greedy episodes in the watermark
// environment and scores the match.
VerificationReport verify(const PolicyFactory& policy_factory, const WatermarkSpec& spec,
                          const VerifierConfig& config, int action_count,
                          const std::string& spec_name = "");

// Network overload; throws std::invalid_argument when the network's
// dimensions do not fit the spec.
VerificationReport verify(const mlp::Network& net, const WatermarkSpec& spec,
                          const VerifierConfig& config, const std::string& spec_name = "");

std::string report_to_json(const VerificationReport& report);
void write_report(const VerificationReport& report, const std::string& path);

}  // namespace seal
