#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "syncurator/channels.hpp"
#include "syncurator/dsp.hpp"
#include "syncurator/landmarks.hpp"

namespace syncurator {

/// Per-channel weights of the synchronization score.
struct ScoringWeights {
    double speech = 0.40;
    double gaze = 0.30;
    double blink = 0.15;
    double pose = 0.15;

    double& operator[](Channel c);
    double operator[](Channel c) const;
    double sum() const noexcept { return speech + gaze + blink + pose; }

    /// Rescaled to sum to one. Throws ConfigError on negative, non-finite or
    /// all-zero weights.
    ScoringWeights normalized() const;
    void validate() const;

    friend bool operator==(const ScoringWeights&, const ScoringWeights&) = default;
};

/// Zeroes `drop` and renormalizes the remaining weights.
ScoringWeights leave_one_out_weights(const ScoringWeights& base, Channel drop);

/// Per-channel correlations; gaze and pose are means over their components.
struct ChannelCorrelations {
    double speech = 0.0;
    double gaze = 0.0;
    double blink = 0.0;
    double pose = 0.0;

    double operator[](Channel c) const;
    double& operator[](Channel c);
};

/// Correlation of one channel between two fully normalized channel sets.
double channel_correlation(const ChannelSet& a, const ChannelSet& b, Channel channel);

/// Interpolates, smooths and normalizes every component. TooSparse
/// failures surface as CoverageError naming the component.
ChannelSet process_channels(const ChannelSet& raw, const DspConfig& dsp);

/// sum_c weight_c * corr_c with weights normalized first.
double weighted_sync_score(const ChannelCorrelations& corr, const ScoringWeights& weights);

struct ComponentCorrelation {
    std::string component;
    double value = 0.0;
};

struct PairScore {
    std::string pair_id;
    PairKind kind = PairKind::edited_pair;
    std::optional<ChannelCorrelations> correlations;  ///< absent when discarded
    std::vector<ComponentCorrelation> components;
    std::optional<double> sync_score;
    double coverage_face = 0.0;  ///< min over both views
    double coverage_pose = 0.0;
    std::size_t geometry_warnings = 0;  ///< degenerate-landmark samples, both views
    bool discarded = false;
    std::string discard_reason;
};

struct PairAnalysis {
    ChannelCorrelations correlations;
    std::vector<ComponentCorrelation> components;
    std::size_t geometry_warnings = 0;
};

/// Correlations of a source/edited pair through the full signal chain.
/// Throws CoverageError when any component is too sparse.
PairAnalysis analyze_pair(const PairRecord& pair, const DspConfig& dsp);

/// Scores a pair. Coverage failures (detection coverage below
/// `coverage_threshold` in either view, or a component rejected by gap
/// interpolation) mark the pair discarded instead of throwing.
PairScore score_pair(const PairRecord& pair, const ScoringWeights& weights, const DspConfig& dsp,
                     double coverage_threshold = 0.5);

/// Re-weights an already scored pair (used by leave-one-out ablations).
PairScore rescore(PairScore score, const ScoringWeights& weights);

/// Descending sync_score, ties by pair_id; discarded pairs last.
void rank_scores(std::vector<PairScore>& scores);

enum class Composition { filtered, id_only, edit_only, random };
std::string_view to_string(Composition composition);
Composition parse_composition(std::string_view text);

struct Ratio {
    int edited = 3;
    int identical = 1;

    friend bool operator==(const Ratio&, const Ratio&) = default;
};
Ratio parse_ratio(std::string_view text);
std::string to_string(const Ratio& ratio);

struct ManifestEntry {
    std::string pair_id;
    PairKind kind = PairKind::edited_pair;
    std::optional<double> sync_score;
};

struct CurationManifest {
    std::vector<ManifestEntry> accepted;
    std::size_t target_size = 512;
    Ratio ratio;
    Composition composition = Composition::filtered;
    std::uint64_t seed = 0;

    std::size_t count(PairKind kind) const;
};

/// Assembles a training manifest. `kinds` overrides the kind recorded on
/// each score when it has an entry for that pair.
CurationManifest build_manifest(const std::vector<PairScore>& scores,
                                const std::map<std::string, PairKind>& kinds,
                                std::size_t target_size, Ratio ratio, Composition composition,
                                std::uint64_t seed);

/// Edited/identical split of `target_size` for `ratio`.
std::pair<std::size_t, std::size_t> split_by_ratio(std::size_t target_size, Ratio ratio);

} // namespace syncurator
