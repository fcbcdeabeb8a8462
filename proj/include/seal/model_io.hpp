#pragma once

#include <string>

#include "seal/dqn.hpp"
#include "seal/mlp.hpp"
#include "seal/trainer.hpp"

namespace seal {

// Everything that determines a training run besides the environments: the
// DQN hyperparameters plus the alternation schedule. JSON round-trippable;
// unknown keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    Hyperparams hp;
    AlternationSchedule schedule;
    bool seed_explicit = false;  // true when the parsed JSON carried a seed

    std::string to_json_text() const;
    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
};

// Model container: one JSON header line (architecture + training-config
// echo), then the flat parameter vector as little-endian doubles, layer by
// layer. save -> load -> save is byte-identical.
struct ModelMeta {
    int version = 1;
    std::string activation = "relu";
    std::string training_json;  // canonical JSON echo of the training setup, may be empty
};

void save_model(const mlp::Network& net, const ModelMeta& meta, const std::string& path);

struct LoadedModel {
    mlp::Network network;
    ModelMeta meta;
};

// Throws std::runtime_error with field-level diagnostics on a version
// mismatch, shape inconsistency or truncated/corrupt file.
LoadedModel load_model(const std::string& path);

}  // namespace seal
