#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "syncurator/curation.hpp"
#include "syncurator/evalmetrics.hpp"

namespace syncurator {

/// Periods (in frames) of the generating motions. Speech and blink share a
/// 20-frame cycle; gaze, shoulder sway and arm swing drift slowly.
struct MotionParams {
    double speech_period = 20.0;
    double blink_period = 20.0;
    double gaze_x_period = 120.0;
    double gaze_y_period = 160.0;
    double shoulder_period = 200.0;
    double arm_period = 324.0;
};

struct SynthSpec {
    std::size_t n_frames = 81;
    double fps = 20.0;
    int lag_frames = 0;        ///< edited view replays the source motion this many frames late
    double noise_sigma = 0.0;  ///< Gaussian jitter on animated edited-view landmarks
    double dropout_rate = 0.0; ///< fraction of edited frames with no detections
    std::uint64_t seed = 0;
    PairKind kind = PairKind::edited_pair;
    MotionParams motion;

    void validate() const;
    std::string pair_id() const;
};

/// Deterministic synthetic pair: the source view follows smooth
/// seed-dependent motions; the edited view replays them shifted by
/// lag_frames, then noise and dropout are applied to it alone.
PairRecord generate_pair(const SynthSpec& spec);

/// Source view only (shared by every lag of one seed).
LandmarkBundle generate_source(const SynthSpec& spec);

/// Spearman rank correlation with average ranks for ties. Returns 0 and
/// sets `degenerate` when either input has constant ranks.
double spearman_rho(std::span<const double> x, std::span<const double> y,
                    bool* degenerate = nullptr);

struct RankingFidelity {
    double rho = 0.0;
    bool degenerate = false;
    std::size_t scored = 0;
    std::size_t discarded = 0;
    std::vector<PairScore> scores;
};

/// Scores every spec and ranks |lag_frames| against sync_score. Discarded
/// pairs are excluded from the rank correlation. Requires >= 10 specs.
RankingFidelity ranking_fidelity(std::span<const SynthSpec> specs,
                                 const ScoringWeights& weights = {},
                                 const DspConfig& dsp = {});

/// lags x seeds grid with shared noise level.
std::vector<SynthSpec> standard_suite(int max_lag = 9, std::size_t seeds = 20,
                                      double noise_sigma = 0.005);

struct SynthEmbeddingOptions {
    std::size_t frames = 81;
    std::size_t image_dim = 32;
    std::size_t face_dim = 16;
    bool with_text = true;
    double face_missing_rate = 0.0;
    std::uint64_t seed = 0;
};

/// Random but structured embeddings for exercising the evaluation path.
EmbeddingBundle synth_embeddings(const std::string& pair_id, const SynthEmbeddingOptions& opts);

} // namespace syncurator
