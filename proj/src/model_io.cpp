#include "seal/model_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace seal {

using nlohmann::json;

namespace {

constexpr const char* kModelFormat = "seal-model";

template <typename T>
T get_field(const json& j, const char* key, const char* kind) {
    if (!j.contains(key))
        throw std::runtime_error(std::string("run config: missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::runtime_error(std::string("run config: field '") + key + "' must be " + kind);
    }
}

}  // namespace

std::string RunConfig::to_json_text() const {
    json j;
    j["total_timesteps"] = hp.total_timesteps;
    j["gamma"] = hp.gamma;
    j["learning_rate"] = hp.learning_rate;
    j["buffer_capacity"] = hp.buffer_capacity;
    j["first_learning_step"] = hp.first_learning_step;
    j["target_sync_period"] = hp.target_sync_period;
    j["batch_size"] = hp.batch_size;
    j["hidden_sizes"] = hp.hidden_sizes;
    j["per_alpha"] = hp.per_alpha;
    j["per_beta"] = hp.per_beta;
    j["priority_floor"] = hp.priority_floor;
    j["epsilon_initial"] = hp.epsilon_initial;
    j["epsilon_final"] = hp.epsilon_final;
    j["exploration_fraction"] = hp.exploration_fraction;
    j["adam_beta1"] = hp.adam_beta1;
    j["adam_beta2"] = hp.adam_beta2;
    j["adam_epsilon"] = hp.adam_epsilon;
    j["main_episodes_per_cycle"] = schedule.main_episodes;
    j["watermark_episodes_per_cycle"] = schedule.watermark_episodes;
    j["seed"] = hp.seed;
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("run config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("run config: top level must be an object");

    static const char* known[] = {"total_timesteps", "gamma", "learning_rate", "buffer_capacity",
                                  "first_learning_step", "target_sync_period", "batch_size",
                                  "hidden_sizes", "per_alpha", "per_beta", "priority_floor",
                                  "epsilon_initial", "epsilon_final", "exploration_fraction",
                                  "adam_beta1", "adam_beta2", "adam_epsilon",
                                  "main_episodes_per_cycle", "watermark_episodes_per_cycle",
                                  "seed"};
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : known) ok = ok || item.key() == key;
        if (!ok) throw std::runtime_error("run config: unknown field '" + item.key() + "'");
    }

    RunConfig cfg;
    auto& hp = cfg.hp;
    if (j.contains("total_timesteps")) hp.total_timesteps = get_field<long>(j, "total_timesteps", "an integer");
    if (j.contains("gamma")) hp.gamma = get_field<double>(j, "gamma", "a number");
    if (j.contains("learning_rate")) hp.learning_rate = get_field<double>(j, "learning_rate", "a number");
    if (j.contains("buffer_capacity")) hp.buffer_capacity = get_field<int>(j, "buffer_capacity", "an integer");
    if (j.contains("first_learning_step")) hp.first_learning_step = get_field<long>(j, "first_learning_step", "an integer");
    if (j.contains("target_sync_period")) hp.target_sync_period = get_field<long>(j, "target_sync_period", "an integer");
    if (j.contains("batch_size")) hp.batch_size = get_field<int>(j, "batch_size", "an integer");
    if (j.contains("hidden_sizes")) hp.hidden_sizes = get_field<std::vector<int>>(j, "hidden_sizes", "an integer array");
    if (j.contains("per_alpha")) hp.per_alpha = get_field<double>(j, "per_alpha", "a number");
    if (j.contains("per_beta")) hp.per_beta = get_field<double>(j, "per_beta", "a number");
    if (j.contains("priority_floor")) hp.priority_floor = get_field<double>(j, "priority_floor", "a number");
    if (j.contains("epsilon_initial")) hp.epsilon_initial = get_field<double>(j, "epsilon_initial", "a number");
    if (j.contains("epsilon_final")) hp.epsilon_final = get_field<double>(j, "epsilon_final", "a number");
    if (j.contains("exploration_fraction")) hp.exploration_fraction = get_field<double>(j, "exploration_fraction", "a number");
    if (j.contains("adam_beta1")) hp.adam_beta1 = get_field<double>(j, "adam_beta1", "a number");
    if (j.contains("adam_beta2")) hp.adam_beta2 = get_field<double>(j, "adam_beta2", "a number");
    if (j.contains("adam_epsilon")) hp.adam_epsilon = get_field<double>(j, "adam_epsilon", "a number");
    if (j.contains("main_episodes_per_cycle"))
        cfg.schedule.main_episodes = get_field<int>(j, "main_episodes_per_cycle", "an integer");
    if (j.contains("watermark_episodes_per_cycle"))
        cfg.schedule.watermark_episodes = get_field<int>(j, "watermark_episodes_per_cycle", "an integer");
    if (j.contains("seed")) {
        hp.seed = get_field<std::uint64_t>(j, "seed", "an unsigned integer");
        cfg.seed_explicit = true;
    }

    hp.check();
    if (cfg.schedule.main_episodes < 1 || cfg.schedule.watermark_episodes < 1)
        throw std::runtime_error("run config: alternation episode counts must be >= 1");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open run config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_json_text(buffer.str());
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json_text();
    if (!out) throw std::runtime_error("failed to write run config to '" + path + "'");
}

namespace {

void put_le64(std::string& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

double get_le64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

}  // namespace

void save_model(const mlp::Network& net, const ModelMeta& meta, const std::string& path) {
    json header;
    header["format"] = kModelFormat;
    header["version"] = meta.version;
    header["state_dim"] = net.input_dim;
    header["action_count"] = net.output_dim;
    header["hidden_sizes"] = net.hidden;
    header["activation"] = meta.activation;
    header["param_count"] = net.param_count();
    if (meta.training_json.empty()) {
        header["training"] = nullptr;
    } else {
        try {
            header["training"] = json::parse(meta.training_json);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(std::string("save_model: training echo is not valid JSON: ") +
                                     e.what());
        }
    }

    std::string blob = header.dump();
    blob.push_back('\n');
    blob.reserve(blob.size() + net.params.size() * 8);
    for (double p : net.params) put_le64(blob, p);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw std::runtime_error("failed to write model to '" + path + "'");
}

namespace {

struct ModelHeader {
    int version = 0;
    std::string activation;
    int state_dim = 0;
    int action_count = 0;
    std::vector<int> hidden;
    int param_count = 0;
    std::string training_json;
};

ModelHeader interpret_header(const json& header, const std::string& path) {
    auto require = [&](const char* key) -> const json& {
        if (!header.contains(key))
            throw std::runtime_error("model '" + path + "': header is missing '" + key + "'");
        return header.at(key);
    };
    try {
        if (require("format").get<std::string>() != kModelFormat)
            throw std::runtime_error("model '" + path + "': not a " + std::string(kModelFormat) +
                                     " file");
        ModelHeader h;
        h.version = require("version").get<int>();
        if (h.version != 1)
            throw std::runtime_error("model '" + path + "': unsupported version " +
                                     std::to_string(h.version) + " (expected 1)");
        h.activation = require("activation").get<std::string>();
        if (h.activation != "relu")
            throw std::runtime_error("model '" + path + "': unknown activation '" + h.activation +
                                     "'");
        h.state_dim = require("state_dim").get<int>();
        h.action_count = require("action_count").get<int>();
        h.hidden = require("hidden_sizes").get<std::vector<int>>();
        h.param_count = require("param_count").get<int>();
        if (h.state_dim <= 0 || h.action_count <= 0)
            throw std::runtime_error("model '" + path + "': dimensions must be positive");
        const json& training = require("training");
        h.training_json = training.is_null() ? std::string() : training.dump();
        return h;
    } catch (const json::exception& e) {
        throw std::runtime_error("model '" + path + "': malformed header field: " + e.what());
    }
}

}  // namespace

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model '" + path + "'");
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    const std::size_t newline = contents.find('\n');
    if (newline == std::string::npos)
        throw std::runtime_error("model '" + path + "': missing header line");
    json header_json;
    try {
        header_json = json::parse(contents.substr(0, newline));
    } catch (const json::parse_error& e) {
        throw std::runtime_error("model '" + path + "': corrupt header: " + e.what());
    }
    const ModelHeader header = interpret_header(header_json, path);

    mlp::Network net = mlp::make_network(header.state_dim, header.hidden, header.action_count);
    if (net.param_count() != header.param_count)
        throw std::runtime_error("model '" + path + "': param_count " +
                                 std::to_string(header.param_count) +
                                 " is inconsistent with the declared layer shapes (expected " +
                                 std::to_string(net.param_count()) + ")");

    const std::size_t expected_bytes = static_cast<std::size_t>(header.param_count) * 8;
    const std::size_t have_bytes = contents.size() - newline - 1;
    if (have_bytes < expected_bytes)
        throw std::runtime_error("model '" + path + "': truncated parameter section (expected " +
                                 std::to_string(expected_bytes) + " bytes, got " +
                                 std::to_string(have_bytes) + ")");
    if (have_bytes > expected_bytes)
        throw std::runtime_error("model '" + path + "': trailing bytes after the parameter section");

    const auto* bytes = reinterpret_cast<const unsigned char*>(contents.data() + newline + 1);
    for (int p = 0; p < header.param_count; ++p) {
        net.params[p] = get_le64(bytes + static_cast<std::size_t>(p) * 8);
        if (!std::isfinite(net.params[p]))
            throw std::runtime_error("model '" + path + "': non-finite parameter at index " +
                                     std::to_string(p));
    }

    ModelMeta meta;
    meta.version = header.version;
    meta.activation = header.activation;
    meta.training_json = header.training_json;
    return {std::move(net), std::move(meta)};
}

}  // namespace seal
