#include "seal/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "seal/cartpole.hpp"
#include "seal/model_io.hpp"
#include "seal/trainer.hpp"
#include "seal/verifier.hpp"
#include "seal/watermark.hpp"

namespace seal::cli {

namespace {

constexpr std::uint64_t kMainEnvStream = 0x10;
constexpr std::uint64_t kEvalStream = 0x20;

std::optional<std::uint64_t> seed_from_environment() {
    const char* text = std::getenv("SEAL_SEED");
    if (!text || !*text) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long value = std::strtoull(text, &end, 10);
    if (errno != 0 || end == text || *end != '\0')
        throw std::runtime_error(std::string("SEAL_SEED is not a valid unsigned integer: '") +
                                 text + "'");
    return static_cast<std::uint64_t>(value);
}

// Precedence: --seed, then an explicit seed in the config file, then the
// SEAL_SEED environment variable, then 0.
std::uint64_t resolve_seed(bool flag_given, std::uint64_t flag_value, const RunConfig& cfg) {
    if (flag_given) return flag_value;
    if (cfg.seed_explicit) return cfg.hp.seed;
    if (const auto env = seed_from_environment()) return *env;
    return cfg.hp.seed;
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

int run_train(const std::string& config_path, const std::string& spec_path,
              const std::string& out_path, const std::string& log_path, bool no_watermark,
              bool seed_given, std::uint64_t seed_value) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    cfg.hp.seed = resolve_seed(seed_given, seed_value, cfg);

    CartPoleEnv main_env(derive_seed(cfg.hp.seed, kMainEnvStream));

    WatermarkSpec spec;
    std::unique_ptr<WatermarkEnv> wm_env;
    std::string spec_name;
    if (!no_watermark) {
        if (spec_path.empty()) {
            std::cerr << "error: train requires --spec unless --no-watermark is given\n";
            return 1;
        }
        spec = load_spec(spec_path);
        const ValidationReport report = validate(spec, main_env.meta());
        if (!report.pass()) {
            std::cerr << "error: watermark spec fails joint-MDP validation:\n";
            for (const auto& v : report.violations) std::cerr << "  " << v << "\n";
            return 1;
        }
        wm_env = build_env(spec, main_env.meta().action_count);
        spec_name = stem_of(spec_path);
    }

    std::cout << "effective run config:\n" << cfg.to_json_text();

    const JointMdp joint{main_env, wm_env.get(), cfg.schedule};
    TrainResult result = train(joint, cfg.hp);

    nlohmann::json echo;
    echo["config"] = nlohmann::json::parse(cfg.to_json_text());
    echo["watermarked"] = !no_watermark;
    if (!spec_name.empty()) echo["spec_name"] = spec_name;
    ModelMeta meta;
    meta.training_json = echo.dump();
    save_model(result.network, meta, out_path);
    if (!log_path.empty()) result.log.write_csv_file(log_path);

    long steps = result.log.episodes.empty() ? 0 : result.log.episodes.back().global_step;
    std::cout << "trained " << result.log.episodes.size() << " episodes over " << steps
              << " steps; model written to " << out_path;
    if (!log_path.empty()) std::cout << ", log to " << log_path;
    std::cout << "\n";
    return 0;
}

int run_verify(const std::string& model_path, const std::string& spec_path, int episodes,
               const std::string& report_path, std::optional<double> theta_match,
               std::optional<double> theta_reject) {
    const LoadedModel model = load_model(model_path);
    const WatermarkSpec spec = load_spec(spec_path);
    VerifierConfig config;
    config.episodes = episodes;
    config.theta_match = theta_match;
    config.theta_reject = theta_reject;
    const VerificationReport report = verify(model.network, spec, config, stem_of(spec_path));
    std::cout << report_to_json(report);
    if (!report_path.empty()) write_report(report, report_path);
    switch (report.verdict) {
        case Verdict::Match: return 0;
        case Verdict::NoMatch: return 2;
        case Verdict::Suspect: return 3;
    }
    return 1;
}

int run_eval(const std::string& model_path, const std::string& env_kind,
             const std::string& spec_path, int episodes, bool seed_given,
             std::uint64_t seed_value) {
    const LoadedModel model = load_model(model_path);
    RunConfig defaults;
    const std::uint64_t seed = resolve_seed(seed_given, seed_value, defaults);

    EnvFactory factory;
    if (env_kind == "cartpole") {
        const EnvMeta meta = cartpole_meta();
        if (model.network.input_dim != meta.state_dim ||
            model.network.output_dim != meta.action_count)
            throw std::runtime_error("model dimensions do not match the cartpole environment");
        factory = [](std::uint64_t s) -> std::unique_ptr<Environment> {
            return std::make_unique<CartPoleEnv>(s);
        };
    } else {
        if (spec_path.empty()) {
            std::cerr << "error: eval --env watermark requires --spec\n";
            return 1;
        }
        const WatermarkSpec spec = load_spec(spec_path);
        if (model.network.input_dim != spec.state_dim)
            throw std::runtime_error("model dimensions do not match the watermark spec");
        const int actions = model.network.output_dim;
        factory = [spec, actions](std::uint64_t) -> std::unique_ptr<Environment> {
            return build_env(spec, actions);
        };
    }

    const EvalResult result = evaluate(greedy_policy(model.network), factory, episodes,
                                       derive_seed(seed, kEvalStream));
    double lo = result.episode_rewards.front(), hi = lo;
    for (double r : result.episode_rewards) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    nlohmann::json j;
    j["env"] = env_kind;
    j["episodes"] = episodes;
    j["mean_reward"] = result.mean_reward;
    j["min_reward"] = lo;
    j["max_reward"] = hi;
    j["seed"] = seed;
    std::cout << j.dump() << "\n";
    return 0;
}

int run_spec_validate(const std::string& path) {
    const WatermarkSpec spec = load_spec(path);
    const EnvMeta meta = cartpole_meta();
    const ValidationReport report = validate(spec, meta);
    static const char* names[5] = {"disjoint state spaces", "equal state dimensions",
                                   "equal action spaces", "deterministic +-c dynamics",
                                   "equal episode step cap"};
    for (int c = 0; c < 5; ++c)
        std::cout << "condition " << c + 1 << " (" << names[c]
                  << "): " << (report.condition_pass[c] ? "pass" : "FAIL") << "\n";
    for (const auto& v : report.violations) std::cout << "  " << v << "\n";

    if (const auto loop = detect_loop(spec)) {
        std::cout << "identifier loop:";
        for (int i : loop->cycle) std::cout << " " << spec.states[i].name;
        std::cout << " (length " << loop->length << ")\n";
    } else {
        std::cout << "warning: no identifier loop is reachable from the initial state\n";
    }
    std::cout << "accidental full-episode match log-probability (uniform policy): "
              << accidental_match_log_prob(spec, meta.action_count) << "\n";
    return report.pass() ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"seal: behavioral watermarking of DQN policies via a joint identifier MDP"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "Train a policy, jointly with a watermark");
    std::string train_config, train_spec, train_out, train_log;
    std::uint64_t train_seed = 0;
    bool no_watermark = false;
    train_cmd->add_option("--config", train_config, "Run config JSON (defaults used when omitted)");
    auto* train_spec_opt = train_cmd->add_option("--spec", train_spec, "Watermark spec JSON");
    train_cmd->add_option("--out", train_out, "Output model file")->required();
    train_cmd->add_option("--log", train_log, "Training curve CSV");
    auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Seed for all randomness");
    train_cmd->add_flag("--no-watermark", no_watermark, "Train the nominal baseline")
        ->excludes(train_spec_opt);

    auto* verify_cmd =
        app.add_subcommand("verify", "Score a suspect policy in the watermark environment");
    std::string verify_model, verify_spec, verify_report;
    int verify_episodes = 100;
    double theta_match = 0.0, theta_reject = 0.0;
    verify_cmd->add_option("--model", verify_model, "Model file")->required();
    verify_cmd->add_option("--spec", verify_spec, "Watermark spec JSON")->required();
    verify_cmd->add_option("--episodes", verify_episodes, "Consecutive greedy episodes");
    verify_cmd->add_option("--report", verify_report, "Write the verification report JSON here");
    auto* tm_opt = verify_cmd->add_option("--theta-match", theta_match,
                                          "Match threshold (default 0.9 c N_max)");
    auto* tr_opt = verify_cmd->add_option("--theta-reject", theta_reject,
                                          "No-match threshold (default 0.1 c N_max)");

    auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a policy");
    std::string eval_model, eval_env, eval_spec;
    int eval_episodes = 100;
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--model", eval_model, "Model file")->required();
    eval_cmd->add_option("--env", eval_env, "Environment")
        ->required()
        ->check(CLI::IsMember({"cartpole", "watermark"}));
    eval_cmd->add_option("--spec", eval_spec, "Watermark spec JSON (required for --env watermark)");
    eval_cmd->add_option("--episodes", eval_episodes, "Number of fresh episodes");
    auto* eval_seed_opt = eval_cmd->add_option("--seed", eval_seed, "Seed for all randomness");

    auto* spec_cmd = app.add_subcommand("spec", "Watermark spec utilities");
    spec_cmd->require_subcommand(1);
    auto* spec_validate_cmd =
        spec_cmd->add_subcommand("validate", "Check a spec against the joint-MDP conditions");
    std::string spec_file;
    spec_validate_cmd->add_option("file", spec_file, "Watermark spec JSON")->required();
    auto* spec_new_cmd = spec_cmd->add_subcommand("new-default", "Write the default CartPole spec");
    std::string spec_out;
    spec_new_cmd->add_option("--out", spec_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd)
            return run_train(train_config, train_spec, train_out, train_log, no_watermark,
                             train_seed_opt->count() > 0, train_seed);
        if (*verify_cmd)
            return run_verify(verify_model, verify_spec, verify_episodes, verify_report,
                              tm_opt->count() ? std::optional<double>(theta_match) : std::nullopt,
                              tr_opt->count() ? std::optional<double>(theta_reject) : std::nullopt);
        if (*eval_cmd)
            return run_eval(eval_model, eval_env, eval_spec, eval_episodes,
                            eval_seed_opt->count() > 0, eval_seed);
        if (*spec_validate_cmd) return run_spec_validate(spec_file);
        if (*spec_new_cmd) {
            save_spec(default_cartpole_spec(), spec_out);
            std::cout << "default watermark spec written to " << spec_out << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace seal::cli
