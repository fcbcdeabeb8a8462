#include "seal/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "seal/cartpole.hpp"

namespace seal {

using nlohmann::json;

WatermarkSpec default_cartpole_spec() {
    WatermarkSpec spec;
    spec.state_dim = 4;
    spec.angle_units = AngleUnits::Degrees;
    spec.states = {{"State[1]", {-5.0, 0.0, -25.0, 0.0}},
                   {"State[2]", {-5.0, 0.0, 25.0, 0.0}},
                   {"State[3]", {5.0, 0.0, -25.0, 0.0}},
                   {"State[4]", {5.0, 0.0, 25.0, 0.0}}};
    // At State[i], Actions[i%2] leads to State[i%4+1] (1-based i).
    spec.links = {{0, 1, 1}, {1, 0, 2}, {2, 1, 3}, {3, 0, 0}};
    spec.terminal = {"Terminal", {-6.0, 0.0, -26.0, 0.0}};
    spec.reward_magnitude = 1.0;
    spec.episode_cap = 500;
    spec.initial_state = 0;
    return spec;
}

namespace {

State convert_units(const WatermarkSpec& spec, const std::vector<double>& values) {
    State out(values.begin(), values.end());
    if (spec.angle_units == AngleUnits::Degrees) {
        if (out.size() != 4)
            throw std::runtime_error(
                "watermark spec: degree angle units are only defined for 4-dimensional states");
        out[2] *= kDegToRad;
        out[3] *= kDegToRad;
    }
    return out;
}

// Structural checks shared by validate() and build_env(): these are the parts
// of condition 4 (plus basic well-formedness) that need no main-environment
// metadata. Returns violation messages.
std::vector<std::string> structural_violations(const WatermarkSpec& spec) {
    std::vector<std::string> v;
    const int n = static_cast<int>(spec.states.size());
    if (n == 0) v.push_back("condition 4: spec has no states");
    if (!(spec.reward_magnitude > 0.0))
        v.push_back("condition 4: reward magnitude c must be > 0");
    if (spec.episode_cap <= 0) v.push_back("condition 4: episode cap must be positive");
    if (spec.initial_state < 0 || spec.initial_state >= n)
        v.push_back("condition 4: initial state index out of range");

    for (const auto& link : spec.links) {
        if (link.from < 0 || link.from >= n || link.to < 0 || link.to >= n) {
            v.push_back("condition 4: link endpoints out of range");
            return v;  // remaining checks assume valid indices
        }
    }

    std::vector<int> out_degree(n, 0);
    for (const auto& link : spec.links) ++out_degree[link.from];
    for (int i = 0; i < n; ++i) {
        if (out_degree[i] == 0)
            v.push_back("condition 4: state '" + spec.states[i].name + "' has no outgoing link");
        if (out_degree[i] > 1)
            v.push_back("condition 4: state '" + spec.states[i].name +
                        "' is the source of more than one link");
    }

    if (spec.angle_units == AngleUnits::Degrees && spec.state_dim != 4)
        v.push_back("condition 2: degree angle units are only defined for 4-dimensional states");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(spec.states[i].values.size()) != spec.state_dim)
            v.push_back("condition 2: state '" + spec.states[i].name +
                        "' does not have dimension " + std::to_string(spec.state_dim));
    }
    if (static_cast<int>(spec.terminal.values.size()) != spec.state_dim)
        v.push_back("condition 2: terminal state does not have dimension " +
                    std::to_string(spec.state_dim));

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j)
            if (spec.states[i].values == spec.states[j].values)
                v.push_back("condition 4: states '" + spec.states[i].name + "' and '" +
                            spec.states[j].name + "' are identical");
        if (spec.states[i].values == spec.terminal.values)
            v.push_back("condition 4: state '" + spec.states[i].name +
                        "' coincides with the terminal state");
    }
    for (const auto& value : spec.terminal.values)
        if (!std::isfinite(value)) v.push_back("condition 4: terminal state has non-finite entry");
    for (const auto& s : spec.states)
        for (const auto& value : s.values)
            if (!std::isfinite(value))
                v.push_back("condition 4: state '" + s.name + "' has non-finite entry");
    return v;
}

bool outside_bounds(const State& state, const std::vector<Interval>& bounds) {
    const std::size_t dim = std::min(state.size(), bounds.size());
    for (std::size_t i = 0; i < dim; ++i)
        if (state[i] < bounds[i].lo || state[i] > bounds[i].hi) return true;
    return false;
}

}  // namespace

std::vector<State> internal_states(const WatermarkSpec& spec) {
    std::vector<State> out;
    out.reserve(spec.states.size());
    for (const auto& s : spec.states) out.push_back(convert_units(spec, s.values));
    return out;
}

State internal_terminal(const WatermarkSpec& spec) {
    return convert_units(spec, spec.terminal.values);
}

bool ValidationReport::pass() const {
    for (bool c : condition_pass)
        if (!c) return false;
    return true;
}

ValidationReport validate(const WatermarkSpec& spec, const EnvMeta& main_meta) {
    ValidationReport report;
    report.condition_pass.fill(true);
    auto fail = [&report](int condition, std::string message) {
        report.condition_pass[condition - 1] = false;
        report.violations.push_back("condition " + std::to_string(condition) + ": " +
                                    std::move(message));
    };

    // Condition 2 first: unit conversion and the disjointness check are only
    // meaningful when dimensions line up.
    const bool dims_ok = spec.state_dim == main_meta.state_dim;
    if (!dims_ok)
        fail(2, "state dimension " + std::to_string(spec.state_dim) +
                    " != main environment dimension " + std::to_string(main_meta.state_dim));
    for (const auto& msg : structural_violations(spec)) {
        const int condition = msg.rfind("condition 2", 0) == 0 ? 2 : 4;
        report.condition_pass[condition - 1] = false;
        report.violations.push_back(msg);
    }

    // Condition 1: S' and S are disjoint. Operationally, every watermark state
    // must have at least one coordinate outside the main environment's
    // reachable observation bounds.
    if (dims_ok && report.condition_pass[1]) {
        const auto states = internal_states(spec);
        for (std::size_t i = 0; i < states.size(); ++i)
            if (!outside_bounds(states[i], main_meta.observation_bounds))
                fail(1, "state '" + spec.states[i].name +
                            "' lies inside the main environment's observation bounds");
        if (!outside_bounds(internal_terminal(spec), main_meta.observation_bounds))
            fail(1, "terminal state lies inside the main environment's observation bounds");
    }

    // Condition 3: equal action spaces. The built environment adopts the main
    // action count, so the check is that every required action exists there.
    for (const auto& link : spec.links)
        if (link.action < 0 || link.action >= main_meta.action_count)
            fail(3, "link action " + std::to_string(link.action) +
                        " outside the main environment's action space of size " +
                        std::to_string(main_meta.action_count));

    // Condition 5: same number of steps before termination.
    if (spec.episode_cap != main_meta.max_steps)
        fail(5, "episode cap " + std::to_string(spec.episode_cap) +
                    " != main environment N_max " + std::to_string(main_meta.max_steps));

    return report;
}

std::optional<LoopDescriptor> detect_loop(const WatermarkSpec& spec) {
    const int n = static_cast<int>(spec.states.size());
    if (n == 0 || spec.initial_state < 0 || spec.initial_state >= n) return std::nullopt;

    std::vector<int> next(n, -1);
    for (const auto& link : spec.links) {
        if (link.from < 0 || link.from >= n || link.to < 0 || link.to >= n) return std::nullopt;
        if (next[link.from] != -1) return std::nullopt;  // ambiguous source
        next[link.from] = link.to;
    }

    std::vector<int> visit_order;
    std::vector<int> position(n, -1);
    int node = spec.initial_state;
    while (node != -1 && position[node] == -1) {
        position[node] = static_cast<int>(visit_order.size());
        visit_order.push_back(node);
        node = next[node];
    }
    if (node == -1) return std::nullopt;  // walked off a chain with no return link

    LoopDescriptor loop;
    loop.cycle.assign(visit_order.begin() + position[node], visit_order.end());
    loop.length = static_cast<int>(loop.cycle.size());
    loop.pivot = node;
    return loop;
}

double accidental_match_log_prob(const WatermarkSpec& spec, int action_count) {
    if (action_count < 1)
        throw std::invalid_argument("accidental_match_log_prob: action_count must be >= 1");
    return static_cast<double>(spec.episode_cap) * std::log(1.0 / action_count);
}

WatermarkEnv::WatermarkEnv(const WatermarkSpec& spec, int action_count)
    : episode_cap_(spec.episode_cap),
      reward_(spec.reward_magnitude),
      initial_(spec.initial_state) {
    auto violations = structural_violations(spec);
    for (const auto& link : spec.links)
        if (link.action < 0 || link.action >= action_count)
            violations.push_back("condition 3: link action outside the action space");
    if (!violations.empty()) {
        std::string msg = "cannot build watermark environment from invalid spec:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw std::runtime_error(msg);
    }

    states_ = internal_states(spec);
    terminal_ = internal_terminal(spec);
    const int n = static_cast<int>(states_.size());
    correct_action_.assign(n, -1);
    next_index_.assign(n, -1);
    for (const auto& link : spec.links) {
        correct_action_[link.from] = link.action;
        next_index_[link.from] = link.to;
    }

    const double inf = std::numeric_limits<double>::infinity();
    meta_.state_dim = spec.state_dim;
    meta_.action_count = action_count;
    meta_.max_steps = spec.episode_cap;
    meta_.observation_bounds.assign(spec.state_dim, {-inf, inf});
}

State WatermarkEnv::reset() {
    current_ = initial_;
    steps_ = 0;
    needs_reset_ = false;
    return states_[current_];
}

StepOutcome WatermarkEnv::step(int action) {
    if (needs_reset_)
        throw std::logic_error("WatermarkEnv::step: episode finished, call reset()");
    if (action < 0 || action >= meta_.action_count)
        throw std::invalid_argument("WatermarkEnv::step: action out of range");

    StepOutcome out;
    ++steps_;
    if (action == correct_action_[current_]) {
        current_ = next_index_[current_];
        out.next_state = states_[current_];
        out.reward = reward_;
        out.done = steps_ >= episode_cap_;
    } else {
        out.next_state = terminal_;
        out.reward = -reward_;
        out.done = true;
    }
    if (out.done) needs_reset_ = true;
    return out;
}

std::unique_ptr<WatermarkEnv> build_env(const WatermarkSpec& spec, int action_count) {
    return std::make_unique<WatermarkEnv>(spec, action_count);
}

namespace {

void expect_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : keys)
            if (item.key() == key) known = true;
        if (!known)
            throw std::runtime_error(std::string("watermark spec: unknown field '") + item.key() +
                                     "' in " + where);
    }
    for (const char* key : keys)
        if (!j.contains(key))
            throw std::runtime_error(std::string("watermark spec: missing field '") + key +
                                     "' in " + where);
}

NamedState parse_named_state(const json& j, const char* where) {
    expect_keys(j, where, {"name", "values"});
    if (!j["name"].is_string())
        throw std::runtime_error(std::string("watermark spec: 'name' must be a string in ") + where);
    if (!j["values"].is_array())
        throw std::runtime_error(std::string("watermark spec: 'values' must be an array in ") + where);
    NamedState s;
    s.name = j["name"].get<std::string>();
    for (const auto& v : j["values"]) {
        if (!v.is_number())
            throw std::runtime_error(std::string("watermark spec: non-numeric state value in ") + where);
        s.values.push_back(v.get<double>());
    }
    return s;
}

}  // namespace

std::string spec_to_json(const WatermarkSpec& spec) {
    json j;
    j["version"] = 1;
    j["state_dim"] = spec.state_dim;
    j["angle_units"] = spec.angle_units == AngleUnits::Degrees ? "degrees" : "radians";
    j["states"] = json::array();
    for (const auto& s : spec.states)
        j["states"].push_back({{"name", s.name}, {"values", s.values}});
    j["links"] = json::array();
    for (const auto& link : spec.links)
        j["links"].push_back({{"from", spec.states.at(link.from).name},
                              {"action", link.action},
                              {"to", spec.states.at(link.to).name}});
    j["terminal"] = {{"name", spec.terminal.name}, {"values", spec.terminal.values}};
    j["reward_magnitude"] = spec.reward_magnitude;
    j["episode_cap"] = spec.episode_cap;
    j["initial_state"] = spec.states.at(spec.initial_state).name;
    return j.dump(2) + "\n";
}

WatermarkSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("watermark spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("watermark spec: top level must be an object");
    expect_keys(j, "spec", {"version", "state_dim", "states", "links", "terminal",
                            "reward_magnitude", "episode_cap", "initial_state", "angle_units"});

    if (!j["version"].is_number_integer() || j["version"].get<int>() != 1)
        throw std::runtime_error("watermark spec: unsupported version (expected 1)");

    WatermarkSpec spec;
    if (!j["state_dim"].is_number_integer() || j["state_dim"].get<int>() <= 0)
        throw std::runtime_error("watermark spec: 'state_dim' must be a positive integer");
    spec.state_dim = j["state_dim"].get<int>();

    const auto units = j["angle_units"].is_string() ? j["angle_units"].get<std::string>() : "";
    if (units == "degrees")
        spec.angle_units = AngleUnits::Degrees;
    else if (units == "radians")
        spec.angle_units = AngleUnits::Radians;
    else
        throw std::runtime_error("watermark spec: 'angle_units' must be \"degrees\" or \"radians\"");
    if (spec.angle_units == AngleUnits::Degrees && spec.state_dim != 4)
        throw std::runtime_error(
            "watermark spec: degree angle units are only defined for 4-dimensional states");

    if (!j["states"].is_array() || j["states"].empty())
        throw std::runtime_error("watermark spec: 'states' must be a non-empty array");
    std::map<std::string, int> index_of;
    for (const auto& js : j["states"]) {
        NamedState s = parse_named_state(js, "states");
        if (index_of.count(s.name))
            throw std::runtime_error("watermark spec: duplicate state name '" + s.name + "'");
        index_of[s.name] = static_cast<int>(spec.states.size());
        spec.states.push_back(std::move(s));
    }

    spec.terminal = parse_named_state(j["terminal"], "terminal");
    if (index_of.count(spec.terminal.name))
        throw std::runtime_error("watermark spec: terminal state reuses the name '" +
                                 spec.terminal.name + "'");

    auto lookup = [&index_of](const json& name, const char* where) {
        if (!name.is_string())
            throw std::runtime_error(std::string("watermark spec: state reference in ") + where +
                                     " must be a string");
        const auto it = index_of.find(name.get<std::string>());
        if (it == index_of.end())
            throw std::runtime_error("watermark spec: unknown state '" + name.get<std::string>() +
                                     "' referenced in " + where);
        return it->second;
    };

    if (!j["links"].is_array())
        throw std::runtime_error("watermark spec: 'links' must be an array");
    for (const auto& jl : j["links"]) {
        expect_keys(jl, "links", {"from", "action", "to"});
        if (!jl["action"].is_number_integer() || jl["action"].get<int>() < 0)
            throw std::runtime_error("watermark spec: link 'action' must be a non-negative integer");
        spec.links.push_back(
            {lookup(jl["from"], "links"), jl["action"].get<int>(), lookup(jl["to"], "links")});
    }

    if (!j["reward_magnitude"].is_number())
        throw std::runtime_error("watermark spec: 'reward_magnitude' must be a number");
    spec.reward_magnitude = j["reward_magnitude"].get<double>();
    if (!j["episode_cap"].is_number_integer() || j["episode_cap"].get<long>() <= 0)
        throw std::runtime_error("watermark spec: 'episode_cap' must be a positive integer");
    spec.episode_cap = j["episode_cap"].get<long>();
    spec.initial_state = lookup(j["initial_state"], "initial_state");
    return spec;
}

void save_spec(const WatermarkSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << spec_to_json(spec);
    if (!out) throw std::runtime_error("failed to write watermark spec to '" + path + "'");
}

WatermarkSpec load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open watermark spec '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return spec_from_json(buffer.str());
}

}  // namespace seal
