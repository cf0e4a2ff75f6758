#include "run_config.hpp"

#include <concepts>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace surgenet::cli {

namespace {

using nlohmann::json;

/// Reads keys from one JSON object and rejects whatever is left over.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where() + " must be a JSON object");
    }

    const json* find(const char* key) {
        const auto it = obj_.find(key);
        if (it == obj_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void read(const char* key, double& dst) {
        if (const json* v = find(key)) {
            if (!v->is_number()) throw type_error(key, "a number");
            dst = v->get<double>();
        }
    }

    template <std::unsigned_integral T>
    void read(const char* key, T& dst) {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) throw type_error(key, "a non-negative integer");
            dst = v->get<T>();
        }
    }

    void read(const char* key, std::string& dst) {
        if (const json* v = find(key)) {
            if (!v->is_string()) throw type_error(key, "a string");
            dst = v->get<std::string>();
        }
    }

    void read(const char* key, std::filesystem::path& dst) {
        std::string s;
        if (find_string(key, s)) dst = s;
    }

    bool find_string(const char* key, std::string& dst) {
        if (obj_.find(key) == obj_.end()) return false;
        read(key, dst);
        return true;
    }

    std::string key_path(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    ConfigError type_error(const char* key, const char* expected) const {
        return ConfigError("config key '" + key_path(key) + "' must be " + expected);
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key '" + key_path(key.c_str()) + "'");
        }
    }

private:
    std::string where() const { return path_.empty() ? "config" : "config key '" + path_ + "'"; }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_hidden(Section& s, Architecture& arch) {
    const json* v = s.find("hidden");
    if (!v) return;
    try {
        if (v->is_string()) {
            arch.hidden_sizes = parse_hidden_sizes(v->get<std::string>());
            return;
        }
        if (v->is_array()) {
            std::vector<std::size_t> sizes;
            for (const auto& n : *v) {
                if (!n.is_number_unsigned()) throw s.type_error("hidden", "\"N1[,N2]\" or [N1, N2]");
                sizes.push_back(n.get<std::size_t>());
            }
            arch.hidden_sizes = sizes;
            return;
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError("config key '" + s.key_path("hidden") + "': " + e.what());
    }
    throw s.type_error("hidden", "\"N1[,N2]\" or [N1, N2]");
}

void read_train(const json& j, RunConfig& cfg) {
    Section s(j, "train");
    read_hidden(s, cfg.train.arch);
    std::string activation;
    if (s.find_string("activation", activation)) {
        try {
            cfg.train.arch.activation = parse_activation(activation);
        } catch (const InvalidArgument& e) {
            throw ConfigError("config key 'train.activation': " + std::string(e.what()));
        }
    }
    s.read("epochs", cfg.train.epochs);
    s.read("batch_tracks", cfg.train.batch_tracks);
    s.read("lr", cfg.train.learning_rate);
    s.read("lr_decay", cfg.train.lr_decay);
    s.read("beta1", cfg.train.adam.beta1);
    s.read("beta2", cfg.train.adam.beta2);
    s.read("epsilon", cfg.train.adam.epsilon);
    s.read("workers", cfg.train.workers);
    s.read("validation_every", cfg.train.validation_every);
    s.finish();
}

void read_oracle(const json& j, OracleParams& o) {
    Section s(j, "oracle");
    if (const json* st = s.find("stations")) {
        if (!st->is_array() || st->size() != o.stations.size()) {
            throw s.type_error("stations", "an array of 10 [lon, lat] pairs");
        }
        for (std::size_t i = 0; i < o.stations.size(); ++i) {
            const auto& p = (*st)[i];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                throw s.type_error("stations", "an array of 10 [lon, lat] pairs");
            }
            o.stations[i] = {p[0].get<double>(), p[1].get<double>()};
        }
    }
    s.read("amplitude", o.amplitude);
    s.read("decay_km", o.decay_km);
    s.read("width_days", o.width_days);
    s.read("asymmetry", o.asymmetry);
    s.read("wind_coefficient", o.wind_coefficient);
    s.read("rmax_ref_km", o.rmax_ref_km);
    s.read("fspeed_ref_ms", o.fspeed_ref_ms);
    s.read("speed_gain", o.speed_gain);
    s.read("heading_ref_deg", o.heading_ref_deg);
    s.read("heading_turn_deg", o.heading_turn_deg);
    s.finish();
}

}  // namespace

EvalSplit parse_split(std::string_view name) {
    if (name == "train") return EvalSplit::training;
    if (name == "val") return EvalSplit::validation;
    if (name == "test") return EvalSplit::testing;
    if (name == "all") return EvalSplit::all;
    throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val, test or all)");
}

std::string_view to_string(EvalSplit split) noexcept {
    switch (split) {
        case EvalSplit::training: return "train";
        case EvalSplit::validation: return "val";
        case EvalSplit::testing: return "test";
        case EvalSplit::all: return "all";
    }
    return "unknown";
}

void RunConfig::validate() const {
    try {
        train.validate();
        oracle.validate();
        landfall_window(window);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (train.arch.input_dim != kInputColumns || train.arch.output_dim != kOutputColumns) {
        throw ConfigError("network must map 6 inputs to 10 outputs");
    }
    if (n_tracks == 0) throw ConfigError("n_tracks must be at least 1");
}

std::filesystem::path RunConfig::history_path() const {
    if (!history.empty()) return history;
    auto p = checkpoint;
    p.replace_extension(".history.csv");
    return p;
}

RunConfig parse_run_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    Section s(root, "");
    s.read("seed", cfg.seed);
    s.read("corpus", cfg.corpus);
    s.read("checkpoint", cfg.checkpoint);
    s.read("history", cfg.history);
    s.read("report", cfg.report);
    if (const json* g = s.find("generate")) {
        Section gs(*g, "generate");
        gs.read("n_tracks", cfg.n_tracks);
        gs.finish();
    }
    if (const json* t = s.find("train")) read_train(*t, cfg);
    if (const json* e = s.find("evaluate")) {
        Section es(*e, "evaluate");
        std::string split;
        if (es.find_string("split", split)) cfg.split = parse_split(split);
        es.read("window", cfg.window);
        es.finish();
    }
    if (const json* o = s.find("oracle")) read_oracle(*o, cfg.oracle);
    s.finish();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_run_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace surgenet::cli
