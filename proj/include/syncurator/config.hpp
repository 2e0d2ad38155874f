#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "syncurator/curation.hpp"

namespace syncurator {

inline constexpr std::string_view kToolName = "syncurator";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Everything that influences a command's output. Worker count is kept
/// apart because it never changes results.
struct RunConfig {
    DspConfig dsp;
    ScoringWeights weights;
    std::optional<Channel> drop_channel;  ///< leave-one-out ablation
    std::size_t target_size = 512;
    Ratio ratio;
    Composition composition = Composition::filtered;
    double coverage_threshold = 0.5;
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;

    /// Weights after the optional leave-one-out drop, normalized.
    ScoringWeights effective_weights() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Overlays the keys present in a TOML document onto `cfg`.
/// Sections: [dsp], [weights], [curation], [run]. Unknown keys are errors.
/// Returns the [run] jobs value when present.
std::optional<unsigned> apply_toml(RunConfig& cfg, std::string_view toml_text);

/// Same layout as TOML. Also accepts any syncurator output file, whose
/// "config" member is used.
std::optional<unsigned> apply_json(RunConfig& cfg, const nlohmann::json& doc);

/// Picks the format from the extension (.json) or content, then applies it.
std::optional<unsigned> apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Canonical config echo embedded in every output file.
nlohmann::ordered_json config_echo(const RunConfig& cfg);

/// FNV-1a 64 of the compact echo, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// "s,g,b,p" -> weights.
ScoringWeights parse_weights(std::string_view text);

} // namespace syncurator
