#include "seal/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace seal {

namespace {

constexpr std::uint64_t kInitStream = 0x01;
constexpr std::uint64_t kActionStream = 0x02;
constexpr std::uint64_t kReplayStream = 0x03;

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace

const char* phase_name(Phase phase) {
    return phase == Phase::Main ? "main" : "watermark";
}

Phase next_phase(const AlternationSchedule& schedule, Phase current, int episodes_in_phase) {
    if (schedule.main_episodes < 1 || schedule.watermark_episodes < 1)
        throw std::invalid_argument("AlternationSchedule: episode counts must be >= 1");
    if (current == Phase::Main)
        return episodes_in_phase >= schedule.main_episodes ? Phase::Watermark : Phase::Main;
    return episodes_in_phase >= schedule.watermark_episodes ? Phase::Main : Phase::Watermark;
}

void TrainingLog::write_csv(std::ostream& out) const {
    out << "episode,phase,total_reward,length,epsilon,global_step\n";
    for (const auto& r : episodes) {
        out << r.episode << ',' << phase_name(r.phase) << ',' << format_double(r.total_reward)
            << ',' << r.length << ',' << format_double(r.epsilon) << ',' << r.global_step << '\n';
    }
}

void TrainingLog::write_csv_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(out);
    if (!out) throw std::runtime_error("failed to write training log to '" + path + "'");
}

TrainingLog TrainingLog::read_csv(std::istream& in) {
    TrainingLog log;
    std::string line;
    if (!std::getline(in, line) || line != "episode,phase,total_reward,length,epsilon,global_step")
        throw std::runtime_error("training log: unexpected CSV header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string episode, phase, reward, length, epsilon, step;
        if (!std::getline(fields, episode, ',') || !std::getline(fields, phase, ',') ||
            !std::getline(fields, reward, ',') || !std::getline(fields, length, ',') ||
            !std::getline(fields, epsilon, ',') || !std::getline(fields, step))
            throw std::runtime_error("training log: malformed CSV row: " + line);
        EpisodeRecord r;
        r.episode = std::stol(episode);
        if (phase == "main")
            r.phase = Phase::Main;
        else if (phase == "watermark")
            r.phase = Phase::Watermark;
        else
            throw std::runtime_error("training log: unknown phase '" + phase + "'");
        r.total_reward = std::stod(reward);
        r.length = std::stol(length);
        r.epsilon = std::stod(epsilon);
        r.global_step = std::stol(step);
        log.episodes.push_back(r);
    }
    return log;
}

TrainingLog TrainingLog::read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open training log '" + path + "'");
    return read_csv(in);
}

TrainResult train(const JointMdp& joint, const Hyperparams& hp) {
    hp.check();
    if (joint.schedule.main_episodes < 1 || joint.schedule.watermark_episodes < 1)
        throw std::invalid_argument("train: schedule episode counts must be >= 1");

    const EnvMeta& main_meta = joint.main_env.meta();
    if (joint.watermark_env) {
        const EnvMeta& wm_meta = joint.watermark_env->meta();
        if (wm_meta.state_dim != main_meta.state_dim)
            throw std::invalid_argument("train: environments disagree on state dimension");
        if (wm_meta.action_count != main_meta.action_count)
            throw std::invalid_argument("train: environments disagree on action count");
        if (wm_meta.max_steps != main_meta.max_steps)
            throw std::invalid_argument("train: environments disagree on the episode step cap");
    }

    Rng root(hp.seed);
    Rng init_rng = root.stream(kInitStream);
    Rng action_rng = root.stream(kActionStream);
    Rng replay_rng = root.stream(kReplayStream);

    mlp::Network net =
        mlp::make_network(main_meta.state_dim, hp.hidden_sizes, main_meta.action_count, init_rng);
    mlp::Network target = net;
    mlp::AdamState opt(net.param_count(), hp.learning_rate);
    opt.beta1 = hp.adam_beta1;
    opt.beta2 = hp.adam_beta2;
    opt.epsilon = hp.adam_epsilon;
    PrioritizedReplay buffer(hp.buffer_capacity, main_meta.state_dim, hp.per_alpha, hp.per_beta);
    const ExplorationSchedule schedule = hp.exploration_schedule();

    TrainingLog log;
    TrainStepWorkspace ws;
    long global_step = 0;
    long episode = 0;
    Phase phase = Phase::Main;
    int episodes_in_phase = 0;

    while (global_step < hp.total_timesteps) {
        Environment& env =
            (phase == Phase::Watermark && joint.watermark_env) ? *joint.watermark_env
                                                               : joint.main_env;
        State state = env.reset();
        double episode_reward = 0.0;
        long episode_length = 0;
        bool done = false;
        while (!done) {
            const int action =
                select_action(net, state, schedule.value(global_step), action_rng, ws.mlp_ws);
            StepOutcome out = env.step(action);
            buffer.store(state, action, out.reward, out.next_state, out.done);
            episode_reward += out.reward;
            ++episode_length;
            ++global_step;
            if (global_step >= hp.first_learning_step && buffer.size() >= hp.batch_size) {
                try {
                    td_train_step(net, target, buffer, hp, opt, replay_rng, ws);
                } catch (const std::runtime_error& e) {
                    throw TrainingFault(e.what(), std::move(log));
                }
            }
            if (global_step % hp.target_sync_period == 0) sync_target(net, target);
            done = out.done;
            state = std::move(out.next_state);
        }
        ++episode;
        ++episodes_in_phase;
        log.episodes.push_back({episode, phase, episode_reward, episode_length,
                                schedule.value(global_step), global_step});
        if (joint.watermark_env) {
            const Phase next = next_phase(joint.schedule, phase, episodes_in_phase);
            if (next != phase) {
                phase = next;
                episodes_in_phase = 0;
            }
        }
    }
    return {std::move(net), std::move(log)};
}

EvalResult evaluate(const PolicyFactory& policy_factory, const EnvFactory& env_factory,
                    int episodes, std::uint64_t seed, Execution exec) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    std::vector<double> rewards(episodes, 0.0);
    const bool parallel = exec == Execution::Parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int e = 0; e < episodes; ++e) {
        auto env = env_factory(derive_seed(seed, 2 * static_cast<std::uint64_t>(e)));
        Policy policy = policy_factory(derive_seed(seed, 2 * static_cast<std::uint64_t>(e) + 1));
        State state = env->reset();
        double total = 0.0;
        bool done = false;
        while (!done) {
            StepOutcome out = env->step(policy(state));
            total += out.reward;
            done = out.done;
            state = std::move(out.next_state);
        }
        rewards[e] = total;
    }
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return {sum / episodes, std::move(rewards)};
}

PolicyFactory greedy_policy(const mlp::Network& net) {
    auto snapshot = std::make_shared<const mlp::Network>(net);
    return [snapshot](std::uint64_t) -> Policy {
        auto ws = std::make_shared<mlp::Workspace>();
        return [snapshot, ws](const State& state) { return greedy_action(*snapshot, state, *ws); };
    };
}

PolicyFactory uniform_random_policy(int action_count) {
    return [action_count](std::uint64_t seed) -> Policy {
        auto rng = std::make_shared<Rng>(seed);
        return [rng, action_count](const State&) { return rng->uniform_int(action_count); };
    };
}

}  // namespace seal
