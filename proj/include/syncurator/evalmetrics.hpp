#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncurator/curation.hpp"

namespace syncurator {

using Embedding = std::vector<float>;

/// Embeddings for one evaluation pair, produced by an external encoder.
/// `face_edit_frames[t]` is empty when no face was detected in frame t.
/// Every vector is L2-normalized before use, so metrics ignore the scale
/// of individual embeddings.
struct EmbeddingBundle {
    std::string pair_id;
    std::string image_model;  ///< opaque provenance, e.g. "ViT-B-32"
    std::string face_model;
    std::vector<Embedding> src_frames;
    std::vector<Embedding> edit_frames;
    Embedding key;
    Embedding src_first;
    std::vector<std::optional<Embedding>> face_edit_frames;
    Embedding face_key;
    std::optional<Embedding> text_source;
    std::optional<Embedding> text_target;

    std::size_t frame_count() const noexcept { return edit_frames.size(); }
};

/// Throws SchemaError on shape or finiteness violations.
void validate_embeddings(const EmbeddingBundle& bundle);

inline constexpr double kMinDirectionNorm = 1e-9;

/// Mean of per-frame values plus how many frames were dropped.
struct FrameAverage {
    double value = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
    std::vector<std::optional<double>> per_frame;  ///< nullopt for skipped frames
};

double cosine(std::span<const float> a, std::span<const float> b);

/// Mean alignment of per-frame edit directions with the key-frame edit
/// direction. Frames whose edit/source difference is below
/// kMinDirectionNorm are skipped.
FrameAverage directional_clip_image(const EmbeddingBundle& b);

/// As directional_clip_image, but against the target-minus-source text
/// direction.
FrameAverage directional_clip_text_dual(const EmbeddingBundle& b);

/// Mean cosine between each edited frame and the target text.
FrameAverage clip_text_align(const EmbeddingBundle& b);

/// Mean cosine between each detected face and the key-frame face.
FrameAverage arcface_similarity(const EmbeddingBundle& b);

/// Synchronization block: per-channel correlations of source vs generated.
ChannelCorrelations eval_sync(const PairRecord& pair, const DspConfig& dsp);

enum class Metric {
    speech_corr,
    gaze_corr,
    blink_corr,
    pose_corr,
    directional_clip_image,
    directional_clip_text_dual,
    clip_text_align,
    arcface_sim,
};
inline constexpr std::size_t kMetricCount = 8;
inline constexpr std::array<Metric, kMetricCount> kMetrics{
    Metric::speech_corr,     Metric::gaze_corr,
    Metric::blink_corr,      Metric::pose_corr,
    Metric::directional_clip_image, Metric::directional_clip_text_dual,
    Metric::clip_text_align, Metric::arcface_sim};

/// Row label as printed in the comparison table.
std::string_view metric_label(Metric m);
std::string_view metric_key(Metric m);
/// "Synchronization", "Edit Fidelity" or "Identity Preservation".
std::string_view metric_block(Metric m);

/// One evaluated pair. Absent values are reported as N/A together with the
/// reason they could not be computed.
struct MetricReport {
    std::string pair_id;
    std::array<std::optional<double>, kMetricCount> values;
    std::array<std::string, kMetricCount> na_reason;
    std::size_t direction_skipped = 0;
    std::size_t face_skipped = 0;
    std::vector<std::vector<std::optional<double>>> traces;  ///< per metric, edit-fidelity/identity only

    std::optional<double>& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
    const std::optional<double>& operator[](Metric m) const {
        return values[static_cast<std::size_t>(m)];
    }
};

/// Computes every metric that the available inputs allow.
MetricReport evaluate_pair(std::string pair_id, const PairRecord* pair,
                           const EmbeddingBundle* embeddings, const DspConfig& dsp,
                           bool with_traces = false);

/// Unweighted mean over the reports that define each metric.
std::array<std::optional<double>, kMetricCount> aggregate_reports(
    std::span<const MetricReport> reports);

// Embedding files: a JSON document, optionally with a little-endian float32
// sidecar holding the arrays.
EmbeddingBundle parse_embeddings(std::string_view json_bytes,
                                 const std::filesystem::path& base_dir = {});
EmbeddingBundle load_embeddings(const std::filesystem::path& path);
std::string serialize_embeddings_json(const EmbeddingBundle& bundle);
/// Writes `json_path` plus a binary payload next to it.
void save_embeddings_binary(const std::filesystem::path& json_path,
                            const EmbeddingBundle& bundle);

} // namespace syncurator
