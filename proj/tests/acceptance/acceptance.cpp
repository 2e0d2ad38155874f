// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"
#include "syncurator/cli.hpp"
#include "syncurator/config.hpp"
#include "syncurator/synthbench.hpp"

using namespace syncurator;
using testing_support::TempDir;

namespace {

/// Collects failed checks for one criterion.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (!ok && failures_.size() < 5) failures_.push_back(what);
        if (!ok) ++failed_;
    }
    void near(double actual, double expected, double tol, const std::string& what) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: %.17g vs %.17g (tol %g)", what.c_str(), actual, expected, tol);
        expect(std::abs(actual - expected) <= tol, buf);
    }
    bool ok() const { return failed_ == 0; }
    std::string summary() const {
        std::string s = std::to_string(total_ - failed_) + "/" + std::to_string(total_) + " checks";
        for (const auto& f : failures_) s += "; " + f;
        return s;
    }
    std::string note;

private:
    std::size_t total_ = 0;
    std::size_t failed_ = 0;
    std::vector<std::string> failures_;
};

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

ChannelSignal signal_of(std::vector<double> v, Stage stage) {
    ChannelSignal s;
    s.component = "acceptance";
    s.values = std::move(v);
    s.stage = stage;
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void constants_fidelity(Checks& c) {
    const RunConfig cfg;
    c.expect(cfg.weights.speech == 0.40 && cfg.weights.gaze == 0.30 && cfg.weights.blink == 0.15 &&
                 cfg.weights.pose == 0.15,
             "weights 0.40/0.30/0.15/0.15");
    c.expect(cfg.dsp.sg_window == 9, "SG window 9");
    c.expect(cfg.dsp.sg_order == 2, "SG order 2");
    c.expect(cfg.dsp.z_epsilon == 1e-6, "z epsilon 1e-6");
    c.expect(cfg.target_size == 512, "target 512");
    c.expect(cfg.ratio.edited == 3 && cfg.ratio.identical == 1, "ratio 3:1");
    const auto [edited, identical] = split_by_ratio(cfg.target_size, cfg.ratio);
    c.expect(edited == 384 && identical == 128, "split 384/128");
}

void dsp_oracles(Checks& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    const DspConfig cfg;
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = gaussian(rng, 81);
        const auto y = savitzky_golay(signal_of(x, Stage::interpolated), cfg).values;
        const auto o = oracles::savgol(x, cfg.sg_window, cfg.sg_order);
        double worst = 0;
        for (std::size_t t = 0; t < x.size(); ++t) worst = std::max(worst, std::abs(y[t] - o[t]));
        c.near(worst, 0.0, 1e-9, "savgol vs least squares");
    }
    for (int degree = 0; degree <= 2; ++degree) {
        const auto coef = gaussian(rng, 3);
        std::vector<double> poly(81);
        for (std::size_t t = 0; t < poly.size(); ++t) {
            const double u = static_cast<double>(t) / 10.0;
            poly[t] = coef[0] + (degree >= 1 ? coef[1] * u : 0.0) + (degree >= 2 ? coef[2] * u * u : 0.0);
        }
        const auto y = savitzky_golay(signal_of(poly, Stage::interpolated), cfg).values;
        double worst = 0;
        for (std::size_t t = 0; t < poly.size(); ++t) worst = std::max(worst, std::abs(y[t] - poly[t]));
        c.near(worst, 0.0, 1e-9, "degree " + std::to_string(degree) + " preserved");
    }
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = gaussian(rng, 81), b = gaussian(rng, 81);
        c.near(pearson(a, b), oracles::pearson(a, b), 1e-12, "pearson vs covariance");
    }
    std::bernoulli_distribution mask(0.25);
    for (int trial = 0; trial < 100; ++trial) {
        auto x = gaussian(rng, 81);
        for (std::size_t i = 1; i + 1 < x.size(); ++i) {
            if (mask(rng)) x[i] = kMissing;
        }
        const auto y = interpolate_gaps(signal_of(x, Stage::raw), cfg).values;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (is_missing(x[i])) c.near(y[i], oracles::line_fill(x, i), 1e-12, "interpolation vs line");
        }
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < 10.0, "runtime under 10 s");
    c.note = std::to_string(elapsed).substr(0, 5) + " s";
}

void channel_formulas(Checks& c) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const LandmarkBundle b = testing_support::random_bundle(seed, 30, 0.1);
        const ChannelSignal mar = speech_signal(b);
        const auto [gx, gy] = gaze_signal(b);
        const ChannelSignal blink = blink_signal(b);
        const auto pose = pose_signals(b);
        for (std::size_t t = 0; t < b.frames.size(); ++t) {
            const auto& fr = b.frames[t];
            if (fr.face) {
                const auto [ox, oy] = oracles::gaze(*fr.face);
                c.near(mar.values[t], oracles::mar(*fr.face), 1e-12, "mar");
                c.near(gx.values[t], ox, 1e-12 * std::max(1.0, std::abs(ox)), "gaze x");
                c.near(gy.values[t], oy, 1e-12 * std::max(1.0, std::abs(oy)), "gaze y");
                c.near(blink.values[t], oracles::blink(*fr.face), 1e-12, "blink");
            } else {
                c.expect(is_missing(mar.values[t]) && is_missing(blink.values[t]), "missing face propagates");
            }
            if (fr.pose) {
                const auto o = oracles::pose(*fr.pose);
                for (std::size_t k = 0; k < kPoseFeatureCount; ++k) {
                    c.near(pose[k].values[t], o[k], 1e-12, std::string(kPoseFeatureNames[k]));
                }
            }
        }
    }
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> scale(0.2, 5.0), shift(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const FaceMesh f = testing_support::random_face(rng);
        const PoseSkeleton p = testing_support::random_pose(rng);
        const double s = scale(rng), dx = shift(rng), dy = shift(rng);
        const FaceMesh g = oracles::transformed(f, s, dx, dy);
        c.near(*mouth_aspect_ratio(g), *mouth_aspect_ratio(f), 1e-9, "mar invariance");
        c.near(*blink_value(g), *blink_value(f), 1e-9, "blink invariance");
        c.near(gaze_vector(g)->x, gaze_vector(f)->x, 1e-9, "gaze x invariance");
        c.near(gaze_vector(g)->y, gaze_vector(f)->y, 1e-9, "gaze y invariance");
        const auto base = pose_features(p);
        const auto moved = pose_features(oracles::transformed(p, s, dx, dy));
        for (std::size_t k = 0; k < 4; ++k) c.near(*moved[k], *base[k], 1e-9, "pose angle invariance");
        for (std::size_t k = 4; k < 6; ++k) c.near(*moved[k], s * *base[k], 1e-9, "wrist height scaling");
    }
}

void filter_fidelity(Checks& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto suite = standard_suite(9, 20, 0.005);
    const RankingFidelity f = ranking_fidelity(suite);
    c.expect(!f.degenerate, "rank correlation defined");
    c.expect(f.discarded == 0, "no suite pair discarded");
    c.expect(f.rho <= -0.9, "spearman rho <= -0.9");
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthSpec id;
        id.seed = seed;
        id.kind = PairKind::identical_pair;
        const PairScore s = score_pair(generate_pair(id), {}, {});
        c.expect(!s.discarded, "identical pair scored");
        if (s.sync_score) c.near(*s.sync_score, 1.0, 1e-6, "identical pair score");

        SynthSpec drop;
        drop.seed = seed;
        drop.lag_frames = static_cast<int>(seed % 10);
        drop.noise_sigma = 0.005;
        drop.dropout_rate = 0.6;
        c.expect(score_pair(generate_pair(drop), {}, {}).discarded, "dropout 0.6 discarded");
    }
    const double elapsed = seconds_since(t0);
    c.expect(elapsed < 60.0, "runtime under 60 s");
    char buf[64];
    std::snprintf(buf, sizeof buf, "rho=%.4f, %.1f s", f.rho, elapsed);
    c.note = buf;
}

Embedding axis(std::size_t i, float scale = 1.0f) {
    Embedding e(6, 0.0f);
    e[i] = scale;
    return e;
}

void metric_oracles(Checks& c) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SynthEmbeddingOptions o;
        o.seed = seed;
        o.frames = 12;
        o.face_missing_rate = 0.25;
        EmbeddingBundle b = synth_embeddings("acc", o);
        if (!b.face_edit_frames[0]) b.face_edit_frames[0] = b.face_key;
        c.near(directional_clip_image(b).value, oracles::directional_image(b), 1e-9, "directional image");
        c.near(directional_clip_text_dual(b).value, oracles::directional_text_dual(b), 1e-9, "text dual");
        c.near(clip_text_align(b).value, oracles::text_align(b), 1e-9, "text align");
        c.near(arcface_similarity(b).value, oracles::arcface(b), 1e-9, "arcface");
    }

    // src = (a, b), edit = key = (a, -b): every difference points exactly along -y.
    EmbeddingBundle b;
    const Embedding src{0.6f, 0.8f, 0, 0, 0, 0}, edit{0.6f, -0.8f, 0, 0, 0, 0};
    for (int t = 0; t < 4; ++t) {
        b.src_frames.push_back(src);
        b.edit_frames.push_back(edit);
        b.face_edit_frames.push_back(axis(4));
    }
    b.src_first = src;
    b.key = edit;
    b.face_key = axis(4, 2.0f);
    b.text_source = src;
    b.text_target = edit;
    c.expect(directional_clip_image(b).value == 1.0, "directional image aligned = 1");
    c.expect(directional_clip_text_dual(b).value == 1.0, "text dual aligned = 1");
    c.expect(arcface_similarity(b).value == 1.0, "arcface identical = 1");

    EmbeddingBundle opposed = b;
    std::swap(opposed.src_frames, opposed.edit_frames);
    c.expect(directional_clip_image(opposed).value == -1.0, "directional image reversed = -1");
    c.expect(directional_clip_text_dual(opposed).value == -1.0, "text dual reversed = -1");

    EmbeddingBundle parallel = b;
    for (auto& e : parallel.edit_frames) e = axis(1, 3.0f);
    parallel.text_target = axis(1);
    c.expect(clip_text_align(parallel).value == 1.0, "text align parallel = 1");

    EmbeddingBundle orthogonal = b;
    orthogonal.text_source = axis(2);
    orthogonal.text_target = axis(3);
    for (auto& f : orthogonal.face_edit_frames) f = axis(5);
    c.expect(directional_clip_text_dual(orthogonal).value == 0.0, "text dual orthogonal = 0");
    c.expect(clip_text_align(orthogonal).value == 0.0, "text align orthogonal = 0");
    c.expect(arcface_similarity(orthogonal).value == 0.0, "arcface orthogonal = 0");
    orthogonal.key = axis(2);
    orthogonal.src_first = axis(3);
    c.expect(directional_clip_image(orthogonal).value == 0.0, "directional image orthogonal = 0");
}

int cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return run_cli(args, out, err);
}

void determinism(Checks& c) {
    TempDir dir("acceptance");
    const std::string data = (dir / "data").string();
    c.expect(cli({"synth", "--seeds", "4", "--lags", "0-4", "--noise", "0.005", "--identical", "4",
                  "--embeddings", "--out", data}) == 0,
             "synth");
    const std::vector<std::string> files{"scores.json", "filtered/manifest.json", "random/manifest.json",
                                         "metrics.json", "metrics.csv"};
    std::vector<std::vector<std::string>> runs;
    for (const char* name : {"run1", "run2"}) {
        const std::string out = (dir / name).string();
        const std::string scores = out + "/scores.json";
        c.expect(cli({"score", data + "/pairs", "--out", out}) == 0, "score");
        c.expect(cli({"filter", scores, "--target-size", "16", "--out", out + "/filtered"}) == 0, "filter");
        c.expect(cli({"filter", scores, "--target-size", "16", "--composition", "random", "--seed", "7",
                      "--out", out + "/random"}) == 0,
                 "filter random");
        c.expect(cli({"eval", "--pairs", data + "/pairs", "--embeddings", data + "/embeddings", "--out", out}) == 0,
                 "eval");
        std::vector<std::string> contents;
        for (const auto& f : files) contents.push_back(read_file(dir / name / f));
        runs.push_back(std::move(contents));
    }
    for (std::size_t i = 0; i < files.size(); ++i) c.expect(runs[0][i] == runs[1][i], files[i] + " identical");
}

void leave_one_out(Checks& c) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const ScoringWeights base;
    for (Channel drop : kChannels) {
        const ScoringWeights w = leave_one_out_weights(base, drop);
        c.expect(w[drop] == 0.0, "dropped weight is zero");
        c.near(w.sum(), 1.0, 1e-12, "remaining weights sum to one");
        for (Channel other : kChannels) {
            if (other != drop) c.near(w[other], base[other] / (1.0 - base[drop]), 1e-12, "renormalized weight");
        }
        for (int trial = 0; trial < 200; ++trial) {
            ChannelCorrelations corr;
            for (Channel ch : kChannels) corr[ch] = u(rng);
            const double before = weighted_sync_score(corr, w);
            corr[drop] = u(rng);
            c.expect(weighted_sync_score(corr, w) == before, "score invariant to dropped channel");
        }
    }
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Checks&)>>> criteria{
        {"constants_fidelity", constants_fidelity}, {"dsp_oracle_suite", dsp_oracles},
        {"channel_formula_suite", channel_formulas}, {"filter_fidelity_benchmark", filter_fidelity},
        {"metric_oracle_suite", metric_oracles},     {"determinism", determinism},
        {"leave_one_out", leave_one_out},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Checks checks;
        try {
            run(checks);
        } catch (const std::exception& e) {
            checks.expect(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %s (%s%s%s)\n", checks.ok() ? "PASS" : "FAIL", name.c_str(), checks.summary().c_str(),
                    checks.note.empty() ? "" : ", ", checks.note.c_str());
        std::fflush(stdout);
        failed += checks.ok() ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
