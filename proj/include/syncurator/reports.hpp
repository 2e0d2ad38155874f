#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "syncurator/config.hpp"
#include "syncurator/evalmetrics.hpp"

namespace syncurator {

/// A per-input failure listed in an output file instead of aborting the run.
struct InputError {
    std::string input;
    std::string message;
};

/// {"tool", "version", "config", "config_hash"} shared by every output.
nlohmann::ordered_json output_header(const RunConfig& cfg);

/// One-line CSV comment carrying the same provenance.
std::string csv_header_comment(const RunConfig& cfg);

std::string csv_field(std::string_view text);

nlohmann::ordered_json score_to_json(const PairScore& score);
PairScore score_from_json(const nlohmann::json& row);

std::string scores_document(const RunConfig& cfg, const std::vector<PairScore>& scores,
                            const std::vector<InputError>& errors);
/// Accepts a scores document or a bare array of rows.
std::vector<PairScore> parse_scores(std::string_view bytes);

struct PoolSummary {
    std::size_t scored = 0;
    std::size_t discarded = 0;
};

std::string manifest_document(const RunConfig& cfg, const CurationManifest& manifest,
                              const PoolSummary& pool);

std::string metrics_document(const RunConfig& cfg, const std::vector<MetricReport>& reports,
                             const std::vector<InputError>& errors);
/// Rows per metric grouped by block; one column per pair plus the mean.
/// Undefined cells are the literal N/A.
std::string metrics_csv(const RunConfig& cfg, const std::vector<MetricReport>& reports);

/// Means of one metrics document, keyed like metric_key.
std::array<std::optional<double>, kMetricCount> parse_metric_summary(std::string_view bytes);

/// Comparison table: one column per labelled metrics document.
std::string comparison_csv(const std::vector<std::string>& labels,
                           const std::vector<std::array<std::optional<double>, kMetricCount>>& columns,
                           int precision);

struct TraceRequest {
    std::set<Stage> stages;      ///< empty = all
    std::set<Channel> channels;  ///< empty = all
};

struct TraceResult {
    std::string csv;
    std::vector<std::string> problems;  ///< components that stopped early
};

/// Long-format rows (frame, view, channel, component, stage, value). Missing
/// samples are empty cells.
TraceResult trace_csv(const RunConfig& cfg, const PairRecord& pair, const TraceRequest& request);

std::string format_number(double value, int precision);

} // namespace syncurator
