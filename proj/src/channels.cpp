#include "syncurator/channels.hpp"

#include <cmath>
#include <numbers>

#include "syncurator/errors.hpp"

namespace syncurator {

std::string_view to_string(Channel channel) {
    switch (channel) {
    case Channel::speech: return "speech";
    case Channel::gaze: return "gaze";
    case Channel::blink: return "blink";
    case Channel::pose: return "pose";
    }
    return "?";
}

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::raw: return "raw";
    case Stage::interpolated: return "interpolated";
    case Stage::smoothed: return "smoothed";
    case Stage::normalized: return "normalized";
    }
    return "?";
}

Channel parse_channel(std::string_view text) {
    for (Channel c : kChannels) {
        if (to_string(c) == text) return c;
    }
    throw ConfigError("unknown channel '" + std::string(text) + "'");
}

Stage parse_stage(std::string_view text) {
    for (Stage s : {Stage::raw, Stage::interpolated, Stage::smoothed, Stage::normalized}) {
        if (to_string(s) == text) return s;
    }
    throw ConfigError("unknown stage '" + std::string(text) + "'");
}

std::size_t ChannelSignal::valid_count() const noexcept {
    std::size_t n = 0;
    for (double v : values) n += !is_missing(v);
    return n;
}

double ChannelSignal::valid_fraction() const noexcept {
    return values.empty() ? 0.0
                          : static_cast<double>(valid_count()) / static_cast<double>(values.size());
}

namespace {

double distance(LandmarkPoint a, LandmarkPoint b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

LandmarkPoint midpoint(LandmarkPoint a, LandmarkPoint b) {
    return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0};
}

std::optional<double> vector_angle(LandmarkPoint from, LandmarkPoint to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    if (std::hypot(dx, dy) < kDegenerateLength) return std::nullopt;
    return std::atan2(dy, dx);
}

ChannelSignal empty_signal(Channel channel, std::string component, std::size_t n) {
    return ChannelSignal{channel, std::move(component), std::vector<double>(n, kMissing),
                         Stage::raw};
}

void warn(Diagnostics* diag, std::size_t frame, std::string_view component,
          std::string_view reason) {
    if (diag) diag->push_back({frame, std::string(component), std::string(reason)});
}

} // namespace

std::optional<double> mouth_aspect_ratio(const FaceMesh& face) {
    const double width = distance(face[mesh::kMouthLeftCorner], face[mesh::kMouthRightCorner]);
    if (width < kDegenerateLength) return std::nullopt;
    double opening = 0.0;
    for (const auto& [upper, lower] : mesh::kLipPairs) opening += distance(face[upper], face[lower]);
    return (opening / 4.0) / width;
}

std::optional<GazeVector> eye_gaze(const FaceMesh& face, const mesh::EyeIndices& eye) {
    const double x_in = face[eye.corner_in].x;
    const double x_out = face[eye.corner_out].x;
    const double y_up = face[eye.lid_upper].y;
    const double y_dn = face[eye.lid_lower].y;
    if (std::abs(x_out - x_in) < kDegenerateLength || std::abs(y_dn - y_up) < kDegenerateLength) {
        return std::nullopt;
    }
    const LandmarkPoint iris = face[eye.iris];
    return GazeVector{2.0 * (iris.x - x_in) / (x_out - x_in) - 1.0,
                      2.0 * (iris.y - y_up) / (y_dn - y_up) - 1.0};
}

std::optional<GazeVector> gaze_vector(const FaceMesh& face) {
    const auto right = eye_gaze(face, mesh::kRightEye);
    const auto left = eye_gaze(face, mesh::kLeftEye);
    if (!right || !left) return std::nullopt;
    return GazeVector{(right->x + left->x) / 2.0, (right->y + left->y) / 2.0};
}

std::optional<double> blink_value(const FaceMesh& face) {
    auto aspect = [&](const mesh::EyeIndices& eye) -> std::optional<double> {
        const double width = distance(face[eye.corner_in], face[eye.corner_out]);
        if (width < kDegenerateLength) return std::nullopt;
        return distance(face[eye.lid_upper], face[eye.lid_lower]) / width;
    };
    const auto right_ear = aspect(mesh::kRightEye);
    const auto left_ear = aspect(mesh::kLeftEye);
    if (!right_ear || !left_ear) return std::nullopt;
    return -0.5 * (*right_ear + *left_ear);
}

std::optional<double> joint_angle(LandmarkPoint a, LandmarkPoint vertex, LandmarkPoint b) {
    const double ux = a.x - vertex.x, uy = a.y - vertex.y;
    const double vx = b.x - vertex.x, vy = b.y - vertex.y;
    if (std::hypot(ux, uy) < kDegenerateLength || std::hypot(vx, vy) < kDegenerateLength) {
        return std::nullopt;
    }
    // atan2(|u x v|, u . v) stays accurate near 0 and pi, unlike acos.
    return std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
}

std::array<std::optional<double>, kPoseFeatureCount> pose_features(const PoseSkeleton& pose) {
    using namespace body;
    const LandmarkPoint shoulder_mid = midpoint(pose[kLeftShoulder], pose[kRightShoulder]);
    const LandmarkPoint hip_mid = midpoint(pose[kLeftHip], pose[kRightHip]);
    return {
        vector_angle(pose[kLeftShoulder], pose[kRightShoulder]),
        vector_angle(shoulder_mid, hip_mid),
        joint_angle(pose[kLeftShoulder], pose[kLeftElbow], pose[kLeftWrist]),
        joint_angle(pose[kRightShoulder], pose[kRightElbow], pose[kRightWrist]),
        pose[kLeftShoulder].y - pose[kLeftWrist].y,
        pose[kRightShoulder].y - pose[kRightWrist].y,
    };
}

ChannelSignal speech_signal(const LandmarkBundle& bundle, Diagnostics* diag) {
    ChannelSignal out = empty_signal(Channel::speech, "mar", bundle.frame_count());
    for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
        const auto& face = bundle.frames[t].face;
        if (!face) continue;
        if (auto mar = mouth_aspect_ratio(*face)) {
            out.values[t] = *mar;
        } else {
            warn(diag, t, out.component, "mouth width below degenerate threshold");
        }
    }
    return out;
}

std::pair<ChannelSignal, ChannelSignal> gaze_signal(const LandmarkBundle& bundle,
                                                    Diagnostics* diag) {
    ChannelSignal gx = empty_signal(Channel::gaze, "gaze_x", bundle.frame_count());
    ChannelSignal gy = empty_signal(Channel::gaze, "gaze_y", bundle.frame_count());
    for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
        const auto& face = bundle.frames[t].face;
        if (!face) continue;
        if (auto g = gaze_vector(*face)) {
            gx.values[t] = g->x;
            gy.values[t] = g->y;
        } else {
            warn(diag, t, "gaze", "eye box extent below degenerate threshold");
        }
    }
    return {std::move(gx), std::move(gy)};
}

ChannelSignal blink_signal(const LandmarkBundle& bundle, Diagnostics* diag) {
    ChannelSignal out = empty_signal(Channel::blink, "blink", bundle.frame_count());
    for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
        const auto& face = bundle.frames[t].face;
        if (!face) continue;
        if (auto b = blink_value(*face)) {
            out.values[t] = *b;
        } else {
            warn(diag, t, out.component, "eye width below degenerate threshold");
        }
    }
    return out;
}

std::array<ChannelSignal, kPoseFeatureCount> pose_signals(const LandmarkBundle& bundle,
                                                          Diagnostics* diag) {
    std::array<ChannelSignal, kPoseFeatureCount> out;
    for (std::size_t k = 0; k < kPoseFeatureCount; ++k) {
        out[k] = empty_signal(Channel::pose, std::string(kPoseFeatureNames[k]),
                              bundle.frame_count());
    }
    for (std::size_t t = 0; t < bundle.frames.size(); ++t) {
        const auto& pose = bundle.frames[t].pose;
        if (!pose) continue;
        const auto features = pose_features(*pose);
        for (std::size_t k = 0; k < kPoseFeatureCount; ++k) {
            if (features[k]) {
                out[k].values[t] = *features[k];
            } else {
                warn(diag, t, out[k].component, "zero-length reference vector");
            }
        }
    }
    return out;
}

void unwrap_angles(ChannelSignal& signal) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double offset = 0.0;
    std::optional<double> previous;
    for (double& v : signal.values) {
        if (is_missing(v)) continue;
        if (previous) {
            const double step = (v + offset) - *previous;
            offset -= two_pi * std::round(step / two_pi);
        }
        v += offset;
        previous = v;
    }
}

std::vector<const ChannelSignal*> ChannelSet::components(Channel channel) const {
    switch (channel) {
    case Channel::speech: return {&speech};
    case Channel::gaze: return {&gaze_x, &gaze_y};
    case Channel::blink: return {&blink};
    case Channel::pose: break;
    }
    std::vector<const ChannelSignal*> out;
    for (const auto& s : pose) out.push_back(&s);
    return out;
}

std::vector<ChannelSignal*> ChannelSet::components(Channel channel) {
    std::vector<ChannelSignal*> out;
    for (const ChannelSignal* s : std::as_const(*this).components(channel)) {
        out.push_back(const_cast<ChannelSignal*>(s));
    }
    return out;
}

std::vector<const ChannelSignal*> ChannelSet::all() const {
    std::vector<const ChannelSignal*> out;
    for (Channel c : kChannels) {
        for (const ChannelSignal* s : components(c)) out.push_back(s);
    }
    return out;
}

std::vector<ChannelSignal*> ChannelSet::all() {
    std::vector<ChannelSignal*> out;
    for (Channel c : kChannels) {
        for (ChannelSignal* s : components(c)) out.push_back(s);
    }
    return out;
}

ChannelSet extract_channels(const LandmarkBundle& bundle, Diagnostics* diag) {
    ChannelSet set;
    set.speech = speech_signal(bundle, diag);
    std::tie(set.gaze_x, set.gaze_y) = gaze_signal(bundle, diag);
    set.blink = blink_signal(bundle, diag);
    set.pose = pose_signals(bundle, diag);
    unwrap_angles(set.pose[0]);
    unwrap_angles(set.pose[1]);
    return set;
}

} // namespace syncurator
