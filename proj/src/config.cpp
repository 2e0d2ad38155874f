#include "syncurator/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include <toml.hpp>

#include "syncurator/errors.hpp"

namespace syncurator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void RunConfig::validate() const {
    dsp.validate();
    weights.validate();
    if (drop_channel) leave_one_out_weights(weights, *drop_channel);
    if (target_size == 0) throw ConfigError("target_size must be positive");
    if (ratio.edited < 0 || ratio.identical < 0 || ratio.edited + ratio.identical == 0) {
        throw ConfigError("ratio must have a positive total");
    }
    if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
        throw ConfigError("coverage_threshold must lie in [0, 1]");
    }
}

ScoringWeights RunConfig::effective_weights() const {
    return drop_channel ? leave_one_out_weights(weights, *drop_channel) : weights.normalized();
}

namespace {

json toml_to_json(const toml::node& node) {
    if (const auto* table = node.as_table()) {
        json out = json::object();
        for (const auto& [key, value] : *table) out[std::string(key.str())] = toml_to_json(value);
        return out;
    }
    if (const auto* array = node.as_array()) {
        json out = json::array();
        for (const auto& value : *array) out.push_back(toml_to_json(value));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ConfigError("unsupported TOML value type");
}

std::string where(std::string_view section, std::string_view key) {
    return std::string(section) + "." + std::string(key);
}

double number(const json& v, std::string_view section, std::string_view key) {
    if (!v.is_number()) throw ConfigError(where(section, key) + " must be a number");
    return v.get<double>();
}

std::int64_t integer(const json& v, std::string_view section, std::string_view key) {
    if (!v.is_number_integer()) throw ConfigError(where(section, key) + " must be an integer");
    return v.get<std::int64_t>();
}

std::uint64_t non_negative(const json& v, std::string_view section, std::string_view key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto i = integer(v, section, key);
    if (i < 0) throw ConfigError(where(section, key) + " must be non-negative");
    return static_cast<std::uint64_t>(i);
}

std::string text(const json& v, std::string_view section, std::string_view key) {
    if (!v.is_string()) throw ConfigError(where(section, key) + " must be a string");
    return v.get<std::string>();
}

template <typename Fn>
void each_key(const json& doc, std::string_view section, Fn&& fn) {
    auto it = doc.find(std::string(section));
    if (it == doc.end()) return;
    if (!it->is_object()) throw ConfigError("[" + std::string(section) + "] must be a table");
    for (const auto& [key, value] : it->items()) fn(key, value);
}

[[noreturn]] void unknown(std::string_view section, std::string_view key) {
    throw ConfigError("unknown config key " + where(section, key));
}

} // namespace

std::optional<unsigned> apply_json(RunConfig& cfg, const json& input) {
    if (!input.is_object()) throw ConfigError("config must be a table");
    const json& doc = input.contains("tool") && input.contains("config") ? input["config"] : input;
    if (!doc.is_object()) throw ConfigError("config must be a table");
    for (const auto& [section, value] : doc.items()) {
        if (section != "dsp" && section != "weights" && section != "curation" && section != "run") {
            throw ConfigError("unknown config section [" + section + "]");
        }
    }

    each_key(doc, "dsp", [&](const std::string& key, const json& v) {
        if (key == "sg_window") {
            cfg.dsp.sg_window = static_cast<int>(integer(v, "dsp", key));
        } else if (key == "sg_order") {
            cfg.dsp.sg_order = static_cast<int>(integer(v, "dsp", key));
        } else if (key == "z_epsilon") {
            cfg.dsp.z_epsilon = number(v, "dsp", key);
        } else if (key == "min_valid_fraction") {
            cfg.dsp.min_valid_fraction = number(v, "dsp", key);
        } else {
            unknown("dsp", key);
        }
    });
    each_key(doc, "weights", [&](const std::string& key, const json& v) {
        Channel c;
        try {
            c = parse_channel(key);
        } catch (const ConfigError&) {
            unknown("weights", key);
        }
        cfg.weights[c] = number(v, "weights", key);
    });
    each_key(doc, "curation", [&](const std::string& key, const json& v) {
        if (key == "target_size") {
            cfg.target_size = static_cast<std::size_t>(non_negative(v, "curation", key));
        } else if (key == "ratio") {
            cfg.ratio = parse_ratio(text(v, "curation", key));
        } else if (key == "composition") {
            cfg.composition = parse_composition(text(v, "curation", key));
        } else if (key == "coverage_threshold") {
            cfg.coverage_threshold = number(v, "curation", key);
        } else if (key == "seed") {
            cfg.seed = non_negative(v, "curation", key);
        } else if (key == "drop_channel") {
            if (v.is_null() || (v.is_string() && v.get<std::string>().empty())) {
                cfg.drop_channel.reset();
            } else {
                cfg.drop_channel = parse_channel(text(v, "curation", key));
            }
        } else {
            unknown("curation", key);
        }
    });
    std::optional<unsigned> jobs;
    each_key(doc, "run", [&](const std::string& key, const json& v) {
        if (key != "jobs") unknown("run", key);
        jobs = static_cast<unsigned>(non_negative(v, "run", key));
    });
    return jobs;
}

std::optional<unsigned> apply_toml(RunConfig& cfg, std::string_view toml_text) {
    toml::table table;
    try {
        table = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string("invalid TOML: ") + std::string(e.description()));
    }
    return apply_json(cfg, toml_to_json(table));
}

std::optional<unsigned> apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::string contents;
    try {
        contents = read_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const auto first = contents.find_first_not_of(" \t\r\n");
    const bool is_json =
        path.extension() == ".json" || (first != std::string::npos && contents[first] == '{');
    try {
        if (!is_json) return apply_toml(cfg, contents);
        json doc;
        try {
            doc = json::parse(contents);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON: ") + e.what());
        }
        return apply_json(cfg, doc);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json echo;
    echo["dsp"] = {{"sg_window", cfg.dsp.sg_window},
                   {"sg_order", cfg.dsp.sg_order},
                   {"z_epsilon", cfg.dsp.z_epsilon},
                   {"min_valid_fraction", cfg.dsp.min_valid_fraction}};
    echo["weights"] = ordered_json::object();
    for (Channel c : kChannels) echo["weights"][std::string(to_string(c))] = cfg.weights[c];
    echo["curation"] = {{"target_size", cfg.target_size},
                        {"ratio", to_string(cfg.ratio)},
                        {"composition", to_string(cfg.composition)},
                        {"coverage_threshold", cfg.coverage_threshold},
                        {"seed", cfg.seed},
                        {"drop_channel", cfg.drop_channel
                                             ? ordered_json(std::string(to_string(*cfg.drop_channel)))
                                             : ordered_json(nullptr)}};
    return echo;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : config_echo(cfg).dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ScoringWeights parse_weights(std::string_view text) {
    ScoringWeights w;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < kChannels.size(); ++i) {
        const auto comma = text.find(',', pos);
        const bool last = i + 1 == kChannels.size();
        if (last != (comma == std::string_view::npos)) {
            throw ConfigError("weights must be four comma-separated numbers, got '" +
                              std::string(text) + "'");
        }
        const std::string part(text.substr(pos, last ? std::string_view::npos : comma - pos));
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc{} || ptr != part.data() + part.size()) {
            throw ConfigError("invalid weight '" + part + "'");
        }
        w[kChannels[i]] = value;
        pos = comma + 1;
    }
    w.validate();
    return w;
}

} // namespace syncurator
