#include "syncurator/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "syncurator/channels.hpp"
#include "syncurator/dsp.hpp"
#include "syncurator/errors.hpp"

namespace syncurator {

void SynthSpec::validate() const {
    if (n_frames < 2) throw ConfigError("synthetic clips need at least two frames");
    if (!(fps > 0.0)) throw ConfigError("fps must be positive");
    if (static_cast<std::size_t>(std::abs(lag_frames)) >= n_frames) {
        throw ConfigError("|lag_frames| must be smaller than n_frames");
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("dropout_rate must lie in [0, 1)");
    }
}

std::string SynthSpec::pair_id() const {
    char buf[128];
    int n = std::snprintf(buf, sizeof buf, "synth-s%04llu-lag%+03d",
                          static_cast<unsigned long long>(seed), lag_frames);
    std::string id(buf, static_cast<std::size_t>(n));
    if (noise_sigma > 0.0) {
        n = std::snprintf(buf, sizeof buf, "-n%g", noise_sigma);
        id.append(buf, static_cast<std::size_t>(n));
    }
    if (dropout_rate > 0.0) {
        n = std::snprintf(buf, sizeof buf, "-d%g", dropout_rate);
        id.append(buf, static_cast<std::size_t>(n));
    }
    if (kind == PairKind::identical_pair) id += "-id";
    return id;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr std::array<std::size_t, 20> kAnimatedFace{61,  291, 13,  14,  82,  87,  312,
                                                    317, 0,   17,  33,  133, 159, 145,
                                                    362, 263, 386, 374, 468, 473};
constexpr std::array<std::size_t, 8> kAnimatedPose{11, 12, 13, 14, 15, 16, 23, 24};

struct Phases {
    double speech, blink, gaze_x, gaze_y, tilt, sway, arm;
};

Phases draw_phases(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    Phases p{};
    for (double* slot : {&p.speech, &p.blink, &p.gaze_x, &p.gaze_y, &p.tilt, &p.sway, &p.arm}) {
        *slot = phase(rng);
    }
    return p;
}

double wave(double t, double period, double phase) {
    return std::sin(kTwoPi * t / period + phase);
}

LandmarkFrame render_frame(double t, const MotionParams& m, const Phases& ph) {
    const double open = 0.012 + 0.009 * wave(t, m.speech_period, ph.speech);
    const double ear = 0.2 + 0.1 * wave(t, m.blink_period, ph.blink);
    const double gx = 0.4 * wave(t, m.gaze_x_period, ph.gaze_x);
    const double gy = 0.3 * wave(t, m.gaze_y_period, ph.gaze_y);

    FaceMesh face;
    face.fill({0.5, 0.3});
    face[61] = {0.46, 0.40};
    face[291] = {0.54, 0.40};
    auto lips = [&](std::size_t upper, std::size_t lower, double x, double gap) {
        face[upper] = {x, 0.40 - gap / 2.0};
        face[lower] = {x, 0.40 + gap / 2.0};
    };
    lips(13, 14, 0.500, open);
    lips(82, 87, 0.485, 0.8 * open);
    lips(312, 317, 0.515, 0.8 * open);
    lips(0, 17, 0.500, open + 0.02);

    const double lid_gap = 0.06 * ear;
    auto eye = [&](const mesh::EyeIndices& e, double x_in) {
        const double cx = x_in + 0.03;
        face[e.corner_in] = {x_in, 0.25};
        face[e.corner_out] = {x_in + 0.06, 0.25};
        face[e.lid_upper] = {cx, 0.25 - lid_gap / 2.0};
        face[e.lid_lower] = {cx, 0.25 + lid_gap / 2.0};
        face[e.iris] = {cx + 0.03 * gx, 0.25 + gy * lid_gap / 2.0};
    };
    eye(mesh::kRightEye, 0.40);
    eye(mesh::kLeftEye, 0.54);

    PoseSkeleton pose;
    pose.fill({0.5, 0.7});
    using namespace body;
    const double tilt = 0.02 * wave(t, m.shoulder_period, ph.tilt);
    const double sway = 0.015 * wave(t, 1.3 * m.shoulder_period, ph.sway);
    const LandmarkPoint mid{0.5 + sway, 0.62};
    pose[kLeftShoulder] = {mid.x + 0.12, mid.y + tilt};
    pose[kRightShoulder] = {mid.x - 0.12, mid.y - tilt};
    pose[kLeftHip] = {0.58, 0.95};
    pose[kRightHip] = {0.42, 0.95};
    pose[kLeftElbow] = {pose[kLeftShoulder].x + 0.03, pose[kLeftShoulder].y + 0.14};
    pose[kRightElbow] = {pose[kRightShoulder].x - 0.03, pose[kRightShoulder].y + 0.14};
    const double arm_left = 0.5 + 0.35 * wave(t, m.arm_period, ph.arm);
    const double arm_right = 0.5 + 0.35 * wave(t, m.arm_period, ph.arm + 1.0);
    pose[kLeftWrist] = {pose[kLeftElbow].x + 0.13 * std::sin(arm_left),
                        pose[kLeftElbow].y + 0.13 * std::cos(arm_left)};
    pose[kRightWrist] = {pose[kRightElbow].x - 0.13 * std::sin(arm_right),
                         pose[kRightElbow].y + 0.13 * std::cos(arm_right)};

    return LandmarkFrame{0, face, pose};
}

LandmarkBundle render_view(const SynthSpec& spec, View view, int lag) {
    const Phases phases = draw_phases(spec.seed);
    LandmarkBundle bundle;
    bundle.video_id = "synth-s" + std::to_string(spec.seed);
    bundle.view = view;
    bundle.fps = spec.fps;
    bundle.frames.reserve(spec.n_frames);
    for (std::size_t i = 0; i < spec.n_frames; ++i) {
        LandmarkFrame frame =
            render_frame(static_cast<double>(i) - static_cast<double>(lag), spec.motion, phases);
        frame.frame_index = i;
        bundle.frames.push_back(std::move(frame));
    }
    return bundle;
}

void apply_noise(LandmarkBundle& bundle, double sigma, std::uint64_t seed) {
    if (sigma <= 0.0) return;
    std::seed_seq seq{seed, std::uint64_t{0x6e6f697365}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> jitter(0.0, sigma);
    for (LandmarkFrame& frame : bundle.frames) {
        for (std::size_t i : kAnimatedFace) {
            (*frame.face)[i].x += jitter(rng);
            (*frame.face)[i].y += jitter(rng);
        }
        for (std::size_t i : kAnimatedPose) {
            (*frame.pose)[i].x += jitter(rng);
            (*frame.pose)[i].y += jitter(rng);
        }
    }
}

void apply_dropout(LandmarkBundle& bundle, double rate, std::uint64_t seed) {
    const auto n = bundle.frames.size();
    const auto drop = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    if (drop == 0) return;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{seed, std::uint64_t{0x64726f70}};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < drop; ++k) {
        bundle.frames[order[k]].face.reset();
        bundle.frames[order[k]].pose.reset();
    }
}

} // namespace

LandmarkBundle generate_source(const SynthSpec& spec) {
    spec.validate();
    return render_view(spec, View::source, 0);
}

PairRecord generate_pair(const SynthSpec& spec) {
    spec.validate();
    LandmarkBundle source = render_view(spec, View::source, 0);
    LandmarkBundle edited = render_view(spec, View::edited, spec.lag_frames);
    // Perturbation streams depend on the lag too, so every grid cell gets
    // its own noise realization.
    const auto stream = spec.seed * 1000003u + static_cast<std::uint64_t>(spec.lag_frames + 1000);
    apply_noise(edited, spec.noise_sigma, stream);
    apply_dropout(edited, spec.dropout_rate, stream);
    return make_pair_record(spec.pair_id(), std::move(source), std::move(edited), spec.kind);
}

double spearman_rho(std::span<const double> x, std::span<const double> y, bool* degenerate) {
    if (x.size() != y.size()) throw LengthMismatch("spearman_rho: lengths differ");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    auto constant = [](const std::vector<double>& r) {
        return std::all_of(r.begin(), r.end(), [&](double v) { return v == r.front(); });
    };
    const bool flat = x.size() < 2 || constant(rx) || constant(ry);
    if (degenerate) *degenerate = flat;
    if (flat) return 0.0;
    return pearson(rx, ry);
}

RankingFidelity ranking_fidelity(std::span<const SynthSpec> specs, const ScoringWeights& weights,
                                 const DspConfig& dsp) {
    if (specs.size() < 10) throw std::invalid_argument("ranking_fidelity needs at least 10 specs");
    RankingFidelity out;
    std::vector<double> lags, scores;
    for (const SynthSpec& spec : specs) {
        PairScore s = score_pair(generate_pair(spec), weights, dsp, dsp.min_valid_fraction);
        if (s.discarded) {
            ++out.discarded;
        } else {
            lags.push_back(std::abs(static_cast<double>(spec.lag_frames)));
            scores.push_back(*s.sync_score);
            ++out.scored;
        }
        out.scores.push_back(std::move(s));
    }
    out.rho = spearman_rho(lags, scores, &out.degenerate);
    return out;
}

std::vector<SynthSpec> standard_suite(int max_lag, std::size_t seeds, double noise_sigma) {
    std::vector<SynthSpec> specs;
    for (std::size_t seed = 0; seed < seeds; ++seed) {
        for (int lag = 0; lag <= max_lag; ++lag) {
            SynthSpec spec;
            spec.seed = seed;
            spec.lag_frames = lag;
            spec.noise_sigma = noise_sigma;
            specs.push_back(spec);
        }
    }
    return specs;
}

EmbeddingBundle synth_embeddings(const std::string& pair_id, const SynthEmbeddingOptions& opts) {
    std::seed_seq seq{opts.seed, std::uint64_t{0x656d62}};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_vec = [&](std::size_t dim, double sd) {
        std::vector<double> v(dim);
        for (double& x : v) x = sd * normal(rng);
        return v;
    };
    auto to_float = [](const std::vector<double>& v) { return Embedding(v.begin(), v.end()); };
    auto add = [](std::vector<double> a, const std::vector<double>& b, double s = 1.0) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
        return a;
    };

    EmbeddingBundle b;
    b.pair_id = pair_id;
    b.image_model = "synthetic";
    b.face_model = "synthetic";
    const auto scene = random_vec(opts.image_dim, 1.0);
    const auto edit_dir = random_vec(opts.image_dim, 0.6);
    const auto identity = random_vec(opts.face_dim, 1.0);
    for (std::size_t t = 0; t < opts.frames; ++t) {
        const auto src = add(scene, random_vec(opts.image_dim, 0.2));
        const auto edit = add(add(src, edit_dir), random_vec(opts.image_dim, 0.2));
        b.src_frames.push_back(to_float(src));
        b.edit_frames.push_back(to_float(edit));
    }
    b.src_first = b.src_frames.front();
    b.key = to_float(add(std::vector<double>(b.src_first.begin(), b.src_first.end()), edit_dir));
    b.face_key = to_float(add(identity, random_vec(opts.face_dim, 0.1)));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t t = 0; t < opts.frames; ++t) {
        const auto face = to_float(add(identity, random_vec(opts.face_dim, 0.3)));
        if (coin(rng) < opts.face_missing_rate) {
            b.face_edit_frames.push_back(std::nullopt);
        } else {
            b.face_edit_frames.push_back(face);
        }
    }
    if (opts.with_text) {
        const auto text_source = add(scene, random_vec(opts.image_dim, 0.5));
        b.text_source = to_float(text_source);
        b.text_target = to_float(add(text_source, edit_dir, 1.5));
    }
    return b;
}

} // namespace syncurator
