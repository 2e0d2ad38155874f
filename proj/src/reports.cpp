#include "syncurator/reports.hpp"

#include <cstdio>
#include <sstream>

#include "syncurator/errors.hpp"

namespace syncurator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json output_header(const RunConfig& cfg) {
    ordered_json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["config"] = config_echo(cfg);
    doc["config_hash"] = config_hash(cfg);
    return doc;
}

std::string csv_header_comment(const RunConfig& cfg) {
    return "# " + std::string(kToolName) + " " + std::string(kToolVersion) +
           " config_hash=" + config_hash(cfg) + " config=" + config_echo(cfg).dump() + "\n";
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_number(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    // Avoid "-0.000000" for tiny negative values.
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

json parse_document(std::string_view bytes, const char* what) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

ordered_json errors_json(const std::vector<InputError>& errors) {
    ordered_json out = ordered_json::array();
    for (const InputError& e : errors) out.push_back({{"input", e.input}, {"error", e.message}});
    return out;
}

double get_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw SchemaError(std::string("score row field '") + key + "' must be a number");
    }
    return it->get<double>();
}

} // namespace

ordered_json score_to_json(const PairScore& s) {
    ordered_json row;
    row["pair_id"] = s.pair_id;
    row["kind"] = to_string(s.kind);
    row["sync_score"] = optional_number(s.sync_score);
    if (s.correlations) {
        row["correlations"] = ordered_json::object();
        for (Channel c : kChannels) row["correlations"][std::string(to_string(c))] = (*s.correlations)[c];
    } else {
        row["correlations"] = nullptr;
    }
    row["components"] = ordered_json::object();
    for (const ComponentCorrelation& c : s.components) row["components"][c.component] = c.value;
    row["coverage_face"] = s.coverage_face;
    row["coverage_pose"] = s.coverage_pose;
    row["geometry_warnings"] = s.geometry_warnings;
    row["discarded"] = s.discarded;
    row["discard_reason"] = s.discarded ? ordered_json(s.discard_reason) : ordered_json(nullptr);
    return row;
}

PairScore score_from_json(const json& row) {
    if (!row.is_object()) throw SchemaError("score row must be an object");
    PairScore s;
    auto id = row.find("pair_id");
    if (id == row.end() || !id->is_string()) throw SchemaError("score row lacks a pair_id");
    s.pair_id = id->get<std::string>();
    auto kind = row.find("kind");
    if (kind == row.end() || !kind->is_string()) throw SchemaError(s.pair_id + ": missing kind");
    s.kind = parse_pair_kind(kind->get<std::string>());
    s.discarded = row.value("discarded", false);
    if (auto r = row.find("discard_reason"); r != row.end() && r->is_string()) {
        s.discard_reason = r->get<std::string>();
    }
    s.coverage_face = row.value("coverage_face", 0.0);
    s.coverage_pose = row.value("coverage_pose", 0.0);
    s.geometry_warnings = row.value("geometry_warnings", std::size_t{0});
    if (auto c = row.find("correlations"); c != row.end() && c->is_object()) {
        ChannelCorrelations corr;
        for (Channel ch : kChannels) corr[ch] = get_number(*c, std::string(to_string(ch)).c_str());
        s.correlations = corr;
    }
    if (auto c = row.find("components"); c != row.end() && c->is_object()) {
        for (const auto& [name, value] : c->items()) {
            if (!value.is_number()) throw SchemaError(s.pair_id + ": component values must be numbers");
            s.components.push_back({name, value.get<double>()});
        }
    }
    if (auto v = row.find("sync_score"); v != row.end() && v->is_number()) s.sync_score = v->get<double>();
    if (!s.discarded && (!s.correlations || !s.sync_score)) {
        throw SchemaError(s.pair_id + ": kept pair without correlations and sync_score");
    }
    return s;
}

std::string scores_document(const RunConfig& cfg, const std::vector<PairScore>& scores,
                            const std::vector<InputError>& errors) {
    ordered_json doc = output_header(cfg);
    ordered_json rows = ordered_json::array();
    for (const PairScore& s : scores) rows.push_back(score_to_json(s));
    doc["scores"] = std::move(rows);
    doc["errors"] = errors_json(errors);
    return doc.dump(2) + "\n";
}

std::vector<PairScore> parse_scores(std::string_view bytes) {
    const json doc = parse_document(bytes, "scores file");
    const json* rows = &doc;
    if (doc.is_object()) {
        auto it = doc.find("scores");
        if (it == doc.end()) throw SchemaError("scores file has no 'scores' array");
        rows = &*it;
    }
    if (!rows->is_array()) throw SchemaError("scores must be an array");
    std::vector<PairScore> out;
    for (const json& row : *rows) out.push_back(score_from_json(row));
    return out;
}

std::string manifest_document(const RunConfig& cfg, const CurationManifest& m,
                              const PoolSummary& pool) {
    ordered_json doc = output_header(cfg);
    const ScoringWeights w = cfg.effective_weights();
    ordered_json weights = ordered_json::object();
    for (Channel c : kChannels) weights[std::string(to_string(c))] = w[c];
    doc["summary"] = {{"composition", to_string(m.composition)},
                      {"target_size", m.target_size},
                      {"ratio", to_string(m.ratio)},
                      {"seed", m.seed},
                      {"effective_weights", std::move(weights)},
                      {"accepted", m.accepted.size()},
                      {"edited", m.count(PairKind::edited_pair)},
                      {"identical", m.count(PairKind::identical_pair)},
                      {"pool_scored", pool.scored},
                      {"pool_discarded", pool.discarded}};
    ordered_json accepted = ordered_json::array();
    for (std::size_t i = 0; i < m.accepted.size(); ++i) {
        const ManifestEntry& e = m.accepted[i];
        accepted.push_back({{"rank", i + 1},
                            {"pair_id", e.pair_id},
                            {"kind", to_string(e.kind)},
                            {"sync_score", optional_number(e.sync_score)}});
    }
    doc["accepted"] = std::move(accepted);
    return doc.dump(2) + "\n";
}

std::string metrics_document(const RunConfig& cfg, const std::vector<MetricReport>& reports,
                             const std::vector<InputError>& errors) {
    ordered_json doc = output_header(cfg);
    ordered_json pairs = ordered_json::array();
    for (const MetricReport& r : reports) {
        ordered_json row;
        row["pair_id"] = r.pair_id;
        row["metrics"] = ordered_json::object();
        row["na_reason"] = ordered_json::object();
        for (Metric m : kMetrics) {
            const std::string key(metric_key(m));
            row["metrics"][key] = optional_number(r[m]);
            if (!r[m]) row["na_reason"][key] = r.na_reason[static_cast<std::size_t>(m)];
        }
        row["direction_skipped"] = r.direction_skipped;
        row["face_skipped"] = r.face_skipped;
        if (!r.traces.empty()) {
            row["per_frame_traces"] = ordered_json::object();
            for (Metric m : kMetrics) {
                const auto& trace = r.traces[static_cast<std::size_t>(m)];
                if (trace.empty()) continue;
                ordered_json series = ordered_json::array();
                for (const auto& v : trace) series.push_back(optional_number(v));
                row["per_frame_traces"][std::string(metric_key(m))] = std::move(series);
            }
        }
        pairs.push_back(std::move(row));
    }
    const auto means = aggregate_reports(reports);
    ordered_json summary = ordered_json::object();
    for (Metric m : kMetrics) {
        summary[std::string(metric_key(m))] = optional_number(means[static_cast<std::size_t>(m)]);
    }
    doc["summary"] = std::move(summary);
    doc["pairs"] = std::move(pairs);
    doc["errors"] = errors_json(errors);
    return doc.dump(2) + "\n";
}

namespace {

std::string cell(const std::optional<double>& v, int precision) {
    return v ? format_number(*v, precision) : std::string("N/A");
}

} // namespace

std::string metrics_csv(const RunConfig& cfg, const std::vector<MetricReport>& reports) {
    std::string out = csv_header_comment(cfg);
    out += "block,metric";
    for (const MetricReport& r : reports) out += "," + csv_field(r.pair_id);
    out += ",mean\n";
    const auto means = aggregate_reports(reports);
    for (Metric m : kMetrics) {
        out += csv_field(metric_block(m)) + "," + csv_field(metric_label(m));
        for (const MetricReport& r : reports) out += "," + cell(r[m], 6);
        out += "," + cell(means[static_cast<std::size_t>(m)], 6) + "\n";
    }
    return out;
}

std::array<std::optional<double>, kMetricCount> parse_metric_summary(std::string_view bytes) {
    const json doc = parse_document(bytes, "metrics file");
    auto it = doc.find("summary");
    if (!doc.is_object() || it == doc.end() || !it->is_object()) {
        throw SchemaError("metrics file has no summary table");
    }
    std::array<std::optional<double>, kMetricCount> out;
    for (Metric m : kMetrics) {
        auto v = it->find(std::string(metric_key(m)));
        if (v == it->end()) throw SchemaError("metrics summary lacks " + std::string(metric_key(m)));
        if (v->is_number()) out[static_cast<std::size_t>(m)] = v->get<double>();
    }
    return out;
}

std::string comparison_csv(const std::vector<std::string>& labels,
                           const std::vector<std::array<std::optional<double>, kMetricCount>>& columns,
                           int precision) {
    std::string out = "block,metric";
    for (const std::string& l : labels) out += "," + csv_field(l);
    out += "\n";
    for (Metric m : kMetrics) {
        out += csv_field(metric_block(m)) + "," + csv_field(metric_label(m));
        for (const auto& col : columns) out += "," + cell(col[static_cast<std::size_t>(m)], precision);
        out += "\n";
    }
    return out;
}

TraceResult trace_csv(const RunConfig& cfg, const PairRecord& pair, const TraceRequest& request) {
    auto wanted_stage = [&](Stage s) { return request.stages.empty() || request.stages.count(s) > 0; };
    auto wanted_channel = [&](Channel c) {
        return request.channels.empty() || request.channels.count(c) > 0;
    };
    TraceResult result;
    std::ostringstream csv;
    csv << csv_header_comment(cfg) << "frame,view,channel,component,stage,value\n";
    char buf[64];
    auto emit = [&](const ChannelSignal& sig, View view) {
        if (!wanted_stage(sig.stage)) return;
        for (std::size_t i = 0; i < sig.values.size(); ++i) {
            csv << i << ',' << to_string(view) << ',' << to_string(sig.channel) << ','
                << csv_field(sig.component) << ',' << to_string(sig.stage) << ',';
            if (!is_missing(sig.values[i])) {
                std::snprintf(buf, sizeof buf, "%.12g", sig.values[i]);
                csv << buf;
            }
            csv << '\n';
        }
    };
    for (const LandmarkBundle* bundle : {&pair.source, &pair.edited}) {
        const ChannelSet set = extract_channels(*bundle);
        for (const ChannelSignal* raw : set.all()) {
            if (!wanted_channel(raw->channel)) continue;
            emit(*raw, bundle->view);
            try {
                ChannelSignal sig = interpolate_gaps(*raw, cfg.dsp);
                emit(sig, bundle->view);
                sig = savitzky_golay(std::move(sig), cfg.dsp);
                emit(sig, bundle->view);
                sig = z_normalize(std::move(sig), cfg.dsp);
                emit(sig, bundle->view);
            } catch (const TooSparse& e) {
                result.problems.push_back(std::string(to_string(bundle->view)) + " " +
                                          raw->component + ": " + e.what());
            }
        }
    }
    result.csv = csv.str();
    return result;
}

} // namespace syncurator
