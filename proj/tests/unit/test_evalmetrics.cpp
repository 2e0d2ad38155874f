#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "support.hpp"
#include "syncurator/errors.hpp"
#include "syncurator/evalmetrics.hpp"
#include "syncurator/synthbench.hpp"

using namespace syncurator;
using testing_support::TempDir;

namespace {

Embedding axis(std::size_t dim, std::size_t i, float scale = 1.0f) {
    Embedding e(dim, 0.0f);
    e[i] = scale;
    return e;
}

/// Unit basis vectors: src = e0, key/edit = e1; faces and text on other axes.
EmbeddingBundle basis_bundle(std::size_t frames) {
    EmbeddingBundle b;
    b.pair_id = "basis";
    for (std::size_t t = 0; t < frames; ++t) {
        b.src_frames.push_back(axis(8, 0));
        b.edit_frames.push_back(axis(8, 1));
        b.face_edit_frames.push_back(axis(4, 0));
    }
    b.src_first = axis(8, 0);
    b.key = axis(8, 1);
    b.face_key = axis(4, 0);
    b.text_source = axis(8, 0);
    b.text_target = axis(8, 1);
    return b;
}

EmbeddingBundle random_bundle(std::uint64_t seed, std::size_t frames = 8, std::size_t dim = 16,
                              double face_missing = 0.0) {
    SynthEmbeddingOptions o;
    o.frames = frames;
    o.image_dim = dim;
    o.face_dim = 8;
    o.seed = seed;
    o.face_missing_rate = face_missing;
    EmbeddingBundle b = synth_embeddings("rand-" + std::to_string(seed), o);
    if (std::none_of(b.face_edit_frames.begin(), b.face_edit_frames.end(), [](const auto& f) { return f.has_value(); })) {
        b.face_edit_frames[0] = b.face_key;
    }
    return b;
}

} // namespace

TEST(Cosine, Basics) {
    EXPECT_NEAR(cosine(axis(3, 0), axis(3, 0, 5.0f)), 1.0, 1e-12);
    EXPECT_NEAR(cosine(axis(3, 0), axis(3, 1)), 0.0, 1e-12);
    EXPECT_EQ(cosine(Embedding(3, 0.0f), axis(3, 1)), 0.0);
    EXPECT_EQ(cosine(axis(3, 0), axis(4, 0)), 0.0);
}

TEST(DirectionalImage, AlignedAndOpposed) {
    EmbeddingBundle b = basis_bundle(5);
    EXPECT_NEAR(directional_clip_image(b).value, 1.0, 1e-12);
    for (std::size_t t = 0; t < 5; ++t) std::swap(b.src_frames[t], b.edit_frames[t]);
    EXPECT_NEAR(directional_clip_image(b).value, -1.0, 1e-12);
}

TEST(DirectionalImage, Errors) {
    EmbeddingBundle b = basis_bundle(3);
    b.key = b.src_first;
    EXPECT_THROW(directional_clip_image(b), UndefinedDirection);
    b = basis_bundle(3);
    b.edit_frames = b.src_frames;
    EXPECT_THROW(directional_clip_image(b), AllFramesSkipped);
}

TEST(DirectionalImage, SkipsUneditedFrames) {
    EmbeddingBundle b = basis_bundle(6);
    b.edit_frames[2] = b.src_frames[2];
    b.edit_frames[4] = b.src_frames[4];
    const FrameAverage avg = directional_clip_image(b);
    EXPECT_EQ(avg.skipped, 2u);
    EXPECT_EQ(avg.used, 4u);
    EXPECT_NEAR(avg.value, 1.0, 1e-12);
    EXPECT_FALSE(avg.per_frame[2].has_value());
}

TEST(DirectionalImage, RoleSwapProperties) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const EmbeddingBundle b = random_bundle(seed);
        const double base = directional_clip_image(b).value;

        EmbeddingBundle frames_swapped = b;
        std::swap(frames_swapped.src_frames, frames_swapped.edit_frames);
        EXPECT_NEAR(directional_clip_image(frames_swapped).value, -base, 1e-12);

        EmbeddingBundle all_swapped = frames_swapped;
        std::swap(all_swapped.key, all_swapped.src_first);
        EXPECT_NEAR(directional_clip_image(all_swapped).value, base, 1e-12);
    }
}

TEST(TextDual, AlignedOrthogonalMissing) {
    EmbeddingBundle b = basis_bundle(4);
    EXPECT_NEAR(directional_clip_text_dual(b).value, 1.0, 1e-12);
    b.text_source = axis(8, 2);
    b.text_target = axis(8, 3);
    EXPECT_NEAR(directional_clip_text_dual(b).value, 0.0, 1e-12);
    b.text_target = b.text_source;
    EXPECT_THROW(directional_clip_text_dual(b), UndefinedDirection);
    b.text_source.reset();
    EXPECT_THROW(directional_clip_text_dual(b), MissingTextEmbeddings);
}

TEST(TextAlign, ParallelAndHalfHalf) {
    EmbeddingBundle b = basis_bundle(4);
    EXPECT_NEAR(clip_text_align(b).value, 1.0, 1e-12);
    // cos = 0.4 on frames 0,1 and 0.2 on frames 2,3.
    b.text_target = axis(8, 0);
    for (std::size_t t = 0; t < 4; ++t) {
        const double c = t < 2 ? 0.4 : 0.2;
        Embedding e(8, 0.0f);
        e[0] = float(c);
        e[1] = float(std::sqrt(1 - c * c));
        b.edit_frames[t] = e;
    }
    EXPECT_NEAR(clip_text_align(b).value, 0.3, 1e-7);
    b.text_target.reset();
    EXPECT_THROW(clip_text_align(b), MissingTextEmbeddings);
}

TEST(ArcFace, IdentityOrthogonalAndMissing) {
    EmbeddingBundle b = basis_bundle(5);
    EXPECT_NEAR(arcface_similarity(b).value, 1.0, 1e-12);
    for (auto& f : b.face_edit_frames) f = axis(4, 1);
    EXPECT_NEAR(arcface_similarity(b).value, 0.0, 1e-12);
    b.face_edit_frames[1].reset();
    EXPECT_EQ(arcface_similarity(b).skipped, 1u);
    for (auto& f : b.face_edit_frames) f.reset();
    EXPECT_THROW(arcface_similarity(b), NoFacesDetected);
}

TEST(Metrics, MatchNaiveOracles) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const EmbeddingBundle b = random_bundle(seed, 10, 16, 0.3);
        EXPECT_NEAR(directional_clip_image(b).value, oracles::directional_image(b), 1e-9);
        EXPECT_NEAR(directional_clip_text_dual(b).value, oracles::directional_text_dual(b), 1e-9);
        EXPECT_NEAR(clip_text_align(b).value, oracles::text_align(b), 1e-9);
        EXPECT_NEAR(arcface_similarity(b).value, oracles::arcface(b), 1e-9);
    }
}

TEST(Metrics, InvariantToPositiveRescaling) {
    std::mt19937_64 rng(4);
    // Powers of two keep the float32 rescaling exact.
    std::uniform_int_distribution<int> s(-6, 6);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const EmbeddingBundle b = random_bundle(seed);
        EmbeddingBundle r = b;
        auto rescale = [&](Embedding& e) {
            const float k = std::ldexp(1.0f, s(rng));
            for (float& x : e) x *= k;
        };
        for (auto& e : r.src_frames) rescale(e);
        for (auto& e : r.edit_frames) rescale(e);
        for (auto& f : r.face_edit_frames) {
            if (f) rescale(*f);
        }
        rescale(r.key);
        rescale(r.src_first);
        rescale(r.face_key);
        rescale(*r.text_source);
        rescale(*r.text_target);
        EXPECT_NEAR(directional_clip_image(r).value, directional_clip_image(b).value, 1e-9);
        EXPECT_NEAR(directional_clip_text_dual(r).value, directional_clip_text_dual(b).value, 1e-9);
        EXPECT_NEAR(clip_text_align(r).value, clip_text_align(b).value, 1e-9);
        EXPECT_NEAR(arcface_similarity(r).value, arcface_similarity(b).value, 1e-9);
    }
}

TEST(Metrics, ValuesWithinUnitInterval) {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const EmbeddingBundle b = random_bundle(seed, 6, 4, 0.2);
        for (double v : {directional_clip_image(b).value, directional_clip_text_dual(b).value,
                         clip_text_align(b).value, arcface_similarity(b).value}) {
            EXPECT_LE(std::abs(v), 1.0);
        }
    }
}

TEST(ValidateEmbeddings, RejectsBadShapes) {
    EmbeddingBundle b = basis_bundle(3);
    EXPECT_NO_THROW(validate_embeddings(b));
    auto broken = b;
    broken.edit_frames[1].push_back(0.0f);
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
    broken = b;
    broken.src_frames.pop_back();
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
    broken = b;
    broken.key[0] = NAN;
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
    broken = b;
    broken.text_target = axis(4, 0);
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
    broken = b;
    broken.face_edit_frames[0] = axis(5, 0);
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
    broken = b;
    broken.src_frames.clear();
    broken.edit_frames.clear();
    broken.face_edit_frames.clear();
    EXPECT_THROW(validate_embeddings(broken), SchemaError);
}

TEST(EvaluatePair, TextlessBundleMarksTextMetricsNA) {
    EmbeddingBundle b = basis_bundle(4);
    b.text_source.reset();
    b.text_target.reset();
    const MetricReport r = evaluate_pair("p", nullptr, &b, {});
    EXPECT_TRUE(r[Metric::directional_clip_image].has_value());
    EXPECT_TRUE(r[Metric::arcface_sim].has_value());
    EXPECT_FALSE(r[Metric::directional_clip_text_dual].has_value());
    EXPECT_FALSE(r[Metric::clip_text_align].has_value());
    EXPECT_FALSE(r[Metric::speech_corr].has_value());
    EXPECT_FALSE(r.na_reason[static_cast<std::size_t>(Metric::clip_text_align)].empty());
}

TEST(EvaluatePair, IdentityInputs) {
    SynthSpec spec;
    spec.kind = PairKind::identical_pair;
    const PairRecord pair = generate_pair(spec);
    const EmbeddingBundle b = basis_bundle(81);
    const MetricReport r = evaluate_pair("p", &pair, &b, {});
    for (Metric m : {Metric::speech_corr, Metric::gaze_corr, Metric::blink_corr, Metric::pose_corr,
                     Metric::arcface_sim}) {
        ASSERT_TRUE(r[m].has_value());
        EXPECT_NEAR(*r[m], 1.0, 1e-9);
    }
}

TEST(EvaluatePair, SyncBlockMatchesScorePair) {
    SynthSpec spec;
    spec.lag_frames = 4;
    spec.noise_sigma = 0.003;
    const PairRecord pair = generate_pair(spec);
    const PairScore s = score_pair(pair, {}, {});
    const ChannelCorrelations c = eval_sync(pair, {});
    for (Channel ch : kChannels) EXPECT_EQ(c[ch], (*s.correlations)[ch]);
}

TEST(EvalSync, WhiteNoiseIsNearZero) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 0.02);
    double sums[4] = {0, 0, 0, 0};
    constexpr int kTrials = 30;
    for (int trial = 0; trial < kTrials; ++trial) {
        PairRecord pair;
        pair.pair_id = "noise";
        for (View v : {View::source, View::edited}) {
            LandmarkBundle b = testing_support::random_bundle(rng(), 81, 0.0, v);
            const LandmarkBundle base = testing_support::random_bundle(999, 1);
            for (auto& f : b.frames) {
                // Small independent jitter around one fixed random face/pose.
                FaceMesh face = *base.frames[0].face;
                PoseSkeleton pose = *base.frames[0].pose;
                for (auto& p : face) p = {p.x + g(rng), p.y + g(rng)};
                for (auto& p : pose) p = {p.x + g(rng), p.y + g(rng)};
                f.face = face;
                f.pose = pose;
            }
            (v == View::source ? pair.source : pair.edited) = std::move(b);
        }
        const ChannelCorrelations c = eval_sync(pair, {});
        for (Channel ch : kChannels) {
            EXPECT_LE(std::abs(c[ch]), 1.0);
            sums[static_cast<int>(ch)] += c[ch];
        }
    }
    for (double s : sums) EXPECT_LT(std::abs(s / kTrials), 0.2);
}

TEST(Aggregate, UnweightedMeanOverDefinedValues) {
    MetricReport a, b, c;
    a[Metric::speech_corr] = 0.2;
    b[Metric::speech_corr] = 0.6;
    c[Metric::arcface_sim] = 0.9;
    const std::vector<MetricReport> reports{a, b, c};
    const auto means = aggregate_reports(reports);
    EXPECT_NEAR(*means[static_cast<std::size_t>(Metric::speech_corr)], 0.4, 1e-12);
    EXPECT_NEAR(*means[static_cast<std::size_t>(Metric::arcface_sim)], 0.9, 1e-12);
    EXPECT_FALSE(means[static_cast<std::size_t>(Metric::gaze_corr)].has_value());
}

TEST(MetricLabels, TableRows) {
    EXPECT_EQ(metric_label(Metric::speech_corr), "Speech Corr.");
    EXPECT_EQ(metric_label(Metric::directional_clip_text_dual), "Directional CLIP (text-dual)");
    EXPECT_EQ(metric_label(Metric::clip_text_align), "CLIP-Text Align.");
    EXPECT_EQ(metric_label(Metric::arcface_sim), "ArcFace Sim.");
    EXPECT_EQ(metric_block(Metric::pose_corr), "Synchronization");
    EXPECT_EQ(metric_block(Metric::clip_text_align), "Edit Fidelity");
    EXPECT_EQ(metric_block(Metric::arcface_sim), "Identity Preservation");
}

TEST(EmbeddingFiles, JsonRoundTrip) {
    const EmbeddingBundle b = random_bundle(3, 7, 16, 0.3);
    const EmbeddingBundle parsed = parse_embeddings(serialize_embeddings_json(b));
    EXPECT_EQ(parsed.src_frames, b.src_frames);
    EXPECT_EQ(parsed.edit_frames, b.edit_frames);
    EXPECT_EQ(parsed.face_edit_frames, b.face_edit_frames);
    EXPECT_EQ(parsed.key, b.key);
    EXPECT_EQ(parsed.text_target, b.text_target);
    EXPECT_EQ(parsed.image_model, "synthetic");
}

TEST(EmbeddingFiles, BinaryRoundTripAndCorruption) {
    TempDir dir("emb");
    EmbeddingBundle b = random_bundle(4, 5, 16, 0.4);
    b.text_source.reset();
    save_embeddings_binary(dir / "x.emb.json", b);
    const EmbeddingBundle parsed = load_embeddings(dir / "x.emb.json");
    EXPECT_EQ(parsed.src_frames, b.src_frames);
    EXPECT_EQ(parsed.face_edit_frames, b.face_edit_frames);
    EXPECT_EQ(parsed.face_key, b.face_key);
    EXPECT_FALSE(parsed.text_source.has_value());
    EXPECT_EQ(parsed.text_target, b.text_target);

    // Little-endian layout: the first float of src_frames[0] leads the payload.
    const std::string raw = read_file(dir / "x.emb.bin");
    std::uint32_t bits = 0;
    for (int k = 3; k >= 0; --k) bits = (bits << 8) | static_cast<unsigned char>(raw[static_cast<std::size_t>(k)]);
    EXPECT_EQ(std::bit_cast<float>(bits), b.src_frames[0][0]);

    write_file(dir / "x.emb.bin", raw.substr(0, raw.size() - 4));
    EXPECT_THROW(load_embeddings(dir / "x.emb.json"), ParseError);
    write_file(dir / "x.emb.bin", raw + "abcd");
    EXPECT_THROW(load_embeddings(dir / "x.emb.json"), ParseError);
}

TEST(EmbeddingFiles, SchemaErrors) {
    EXPECT_THROW(parse_embeddings("[1,2]"), SchemaError);
    EXPECT_THROW(parse_embeddings("{\"pair_id\": \"a\", \"encoding\": \"base64\"}"), SchemaError);
    EXPECT_THROW(parse_embeddings("{"), ParseError);
}
