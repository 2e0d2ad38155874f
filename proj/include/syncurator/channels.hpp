#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "syncurator/landmarks.hpp"

namespace syncurator {

enum class Channel { speech, gaze, blink, pose };
inline constexpr std::array<Channel, 4> kChannels{Channel::speech, Channel::gaze, Channel::blink,
                                                  Channel::pose};

/// Processing stages only move forward: raw -> interpolated -> smoothed -> normalized.
enum class Stage { raw, interpolated, smoothed, normalized };

std::string_view to_string(Channel channel);
std::string_view to_string(Stage stage);
Channel parse_channel(std::string_view text);
Stage parse_stage(std::string_view text);

/// Missing samples are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return v != v; }

struct ChannelSignal {
    Channel channel = Channel::speech;
    std::string component;
    std::vector<double> values;
    Stage stage = Stage::raw;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t valid_count() const noexcept;
    double valid_fraction() const noexcept;
};

/// A frame whose landmarks made a feature undefined (zero-length reference
/// vector). The affected sample becomes missing.
struct GeometryWarning {
    std::size_t frame = 0;
    std::string component;
    std::string reason;
};
using Diagnostics = std::vector<GeometryWarning>;

// MediaPipe face-mesh (478 points, refined irises) and pose (33 points) indices.
namespace mesh {
inline constexpr std::size_t kMouthLeftCorner = 61;
inline constexpr std::size_t kMouthRightCorner = 291;
inline constexpr std::array<std::pair<std::size_t, std::size_t>, 4> kLipPairs{
    {{13, 14}, {82, 87}, {312, 317}, {0, 17}}};

/// Eye landmarks. The two horizontal corners of both eyes are listed in the
/// same image direction (left to right for a frontal face), so averaging the
/// per-eye gaze follows conjugate eye movement instead of cancelling it.
struct EyeIndices {
    std::size_t iris;
    std::size_t corner_in;
    std::size_t corner_out;
    std::size_t lid_upper;
    std::size_t lid_lower;
};
inline constexpr EyeIndices kRightEye{468, 33, 133, 159, 145};
inline constexpr EyeIndices kLeftEye{473, 362, 263, 386, 374};
} // namespace mesh

namespace body {
inline constexpr std::size_t kLeftShoulder = 11;
inline constexpr std::size_t kRightShoulder = 12;
inline constexpr std::size_t kLeftElbow = 13;
inline constexpr std::size_t kRightElbow = 14;
inline constexpr std::size_t kLeftWrist = 15;
inline constexpr std::size_t kRightWrist = 16;
inline constexpr std::size_t kLeftHip = 23;
inline constexpr std::size_t kRightHip = 24;
} // namespace body

inline constexpr double kDegenerateLength = 1e-9;

// Per-frame features. Each returns nullopt when its reference length falls
// below kDegenerateLength.
std::optional<double> mouth_aspect_ratio(const FaceMesh& face);

struct GazeVector {
    double x = 0.0;
    double y = 0.0;
};
std::optional<GazeVector> eye_gaze(const FaceMesh& face, const mesh::EyeIndices& eye);
/// Binocular mean of eye_gaze; undefined if either eye is.
std::optional<GazeVector> gaze_vector(const FaceMesh& face);

/// Negated mean eye aspect ratio; closures are positive-going peaks.
std::optional<double> blink_value(const FaceMesh& face);

inline constexpr std::size_t kPoseFeatureCount = 6;
inline constexpr std::array<std::string_view, kPoseFeatureCount> kPoseFeatureNames{
    "shoulder_angle", "torso_angle",       "elbow_left",
    "elbow_right",    "wrist_height_left", "wrist_height_right"};

/// Angles in radians: shoulder/torso in (-pi, pi] from the +x image axis,
/// elbows as interior joint angles in [0, pi]. Wrist height is
/// y_shoulder - y_wrist.
std::array<std::optional<double>, kPoseFeatureCount> pose_features(const PoseSkeleton& pose);

/// Interior angle at `vertex` between the rays to `a` and `b`.
std::optional<double> joint_angle(LandmarkPoint a, LandmarkPoint vertex, LandmarkPoint b);

// Series extraction over a whole bundle. Missing detections and degenerate
// frames become missing samples; degenerate frames are also reported.
ChannelSignal speech_signal(const LandmarkBundle& bundle, Diagnostics* diag = nullptr);
std::pair<ChannelSignal, ChannelSignal> gaze_signal(const LandmarkBundle& bundle,
                                                    Diagnostics* diag = nullptr);
ChannelSignal blink_signal(const LandmarkBundle& bundle, Diagnostics* diag = nullptr);
std::array<ChannelSignal, kPoseFeatureCount> pose_signals(const LandmarkBundle& bundle,
                                                          Diagnostics* diag = nullptr);

/// Removes 2*pi jumps between consecutive valid samples of an angle series.
void unwrap_angles(ChannelSignal& signal);

struct ChannelSet {
    ChannelSignal speech;
    ChannelSignal gaze_x;
    ChannelSignal gaze_y;
    ChannelSignal blink;
    std::array<ChannelSignal, kPoseFeatureCount> pose;

    std::vector<const ChannelSignal*> components(Channel channel) const;
    std::vector<ChannelSignal*> components(Channel channel);
    /// All ten component signals in canonical order.
    std::vector<const ChannelSignal*> all() const;
    std::vector<ChannelSignal*> all();
};

/// Extracts every channel, unwrapping the shoulder and torso angle series.
ChannelSet extract_channels(const LandmarkBundle& bundle, Diagnostics* diag = nullptr);

} // namespace syncurator
