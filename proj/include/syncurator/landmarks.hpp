#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace syncurator {

inline constexpr std::size_t kFaceLandmarkCount = 478;
inline constexpr std::size_t kPoseLandmarkCount = 33;

/// 2D landmark in normalized image coordinates (x right, y down).
struct LandmarkPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const LandmarkPoint&, const LandmarkPoint&) = default;
};

using FaceMesh = std::array<LandmarkPoint, kFaceLandmarkCount>;
using PoseSkeleton = std::array<LandmarkPoint, kPoseLandmarkCount>;

/// One video frame. An absent face or pose means the detector missed it.
struct LandmarkFrame {
    std::size_t frame_index = 0;
    std::optional<FaceMesh> face;
    std::optional<PoseSkeleton> pose;

    friend bool operator==(const LandmarkFrame&, const LandmarkFrame&) = default;
};

enum class View { source, edited };

struct LandmarkBundle {
    std::string video_id;
    View view = View::source;
    double fps = 0.0;
    std::vector<LandmarkFrame> frames;

    std::size_t frame_count() const noexcept { return frames.size(); }

    friend bool operator==(const LandmarkBundle&, const LandmarkBundle&) = default;
};

enum class PairKind { edited_pair, identical_pair };

/// Frame-aligned source/edited views of one training pair.
struct PairRecord {
    std::string pair_id;
    LandmarkBundle source;
    LandmarkBundle edited;
    PairKind kind = PairKind::edited_pair;
};

enum class Subsystem { face, pose };

std::string_view to_string(View view);
std::string_view to_string(PairKind kind);
std::string_view to_string(Subsystem subsystem);
View parse_view(std::string_view text);
PairKind parse_pair_kind(std::string_view text);

/// Checks every bundle invariant; throws SchemaError naming the first
/// violation (for gaps, the first frame whose index is out of sequence).
void validate_bundle(const LandmarkBundle& bundle);

/// Parses the canonical JSON bundle format. Throws ParseError on malformed
/// JSON and SchemaError on invariant violations.
LandmarkBundle parse_bundle(std::string_view bytes);
std::string serialize_bundle(const LandmarkBundle& bundle);

LandmarkBundle load_bundle(const std::filesystem::path& path);
void save_bundle(const std::filesystem::path& path, const LandmarkBundle& bundle);

/// Fraction of frames in which `subsystem` was detected.
double detection_coverage(const LandmarkBundle& bundle, Subsystem subsystem);

/// Builds a pair, rejecting views of unequal length.
PairRecord make_pair_record(std::string pair_id, LandmarkBundle source, LandmarkBundle edited,
                            PairKind kind);

/// On-disk pair file: references two bundle files by path.
struct PairFile {
    std::string pair_id;
    PairKind kind = PairKind::edited_pair;
    std::filesystem::path source;
    std::filesystem::path edited;
};

PairFile parse_pair_file(std::string_view bytes);
std::string serialize_pair_file(const PairFile& file);

/// Reads a pair file and both bundles it references. Relative bundle paths
/// resolve against the pair file's directory.
PairRecord load_pair(const std::filesystem::path& pair_path);
void save_pair_file(const std::filesystem::path& path, const PairFile& file);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace syncurator
