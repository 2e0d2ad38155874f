#include "syncurator/evalmetrics.hpp"

#include <cmath>

#include "syncurator/errors.hpp"

namespace syncurator {

namespace {

using Vec = std::vector<double>;

double norm(const Vec& v) {
    double ss = 0.0;
    for (double x : v) ss += x * x;
    return std::sqrt(ss);
}

double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

Vec unit(std::span<const float> e) {
    Vec v(e.begin(), e.end());
    const double n = norm(v);
    for (double& x : v) x /= n;
    return v;
}

Vec difference(const Vec& a, const Vec& b) {
    Vec d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

void scale(Vec& v, double s) {
    for (double& x : v) x *= s;
}

FrameAverage average(std::vector<std::optional<double>> per_frame) {
    FrameAverage out;
    double total = 0.0;
    for (const auto& v : per_frame) {
        if (v) {
            total += *v;
            ++out.used;
        } else {
            ++out.skipped;
        }
    }
    out.value = out.used > 0 ? total / static_cast<double>(out.used) : 0.0;
    out.per_frame = std::move(per_frame);
    return out;
}

FrameAverage directional_against(const EmbeddingBundle& b, Vec direction) {
    scale(direction, 1.0 / norm(direction));
    std::vector<std::optional<double>> per_frame(b.frame_count());
    for (std::size_t t = 0; t < b.frame_count(); ++t) {
        Vec local = difference(unit(b.edit_frames[t]), unit(b.src_frames[t]));
        const double n = norm(local);
        if (n < kMinDirectionNorm) continue;
        scale(local, 1.0 / n);
        per_frame[t] = dot(local, direction);
    }
    FrameAverage out = average(std::move(per_frame));
    if (out.used == 0) throw AllFramesSkipped("every frame has a zero edit direction");
    return out;
}

} // namespace

double cosine(std::span<const float> a, std::span<const float> b) {
    const Vec va(a.begin(), a.end());
    const Vec vb(b.begin(), b.end());
    const double denom = norm(va) * norm(vb);
    if (va.size() != vb.size() || denom == 0.0) return 0.0;
    return dot(va, vb) / denom;
}

FrameAverage directional_clip_image(const EmbeddingBundle& b) {
    Vec global = difference(unit(b.key), unit(b.src_first));
    if (norm(global) < kMinDirectionNorm) {
        throw UndefinedDirection("key frame and first source frame embeddings coincide");
    }
    return directional_against(b, std::move(global));
}

FrameAverage directional_clip_text_dual(const EmbeddingBundle& b) {
    if (!b.text_source || !b.text_target) {
        throw MissingTextEmbeddings("source and target text embeddings are required");
    }
    Vec text_dir = difference(unit(*b.text_target), unit(*b.text_source));
    if (norm(text_dir) < kMinDirectionNorm) {
        throw UndefinedDirection("source and target text embeddings coincide");
    }
    return directional_against(b, std::move(text_dir));
}

FrameAverage clip_text_align(const EmbeddingBundle& b) {
    if (!b.text_target) throw MissingTextEmbeddings("target text embedding is required");
    const Vec target = unit(*b.text_target);
    std::vector<std::optional<double>> per_frame(b.frame_count());
    for (std::size_t t = 0; t < b.frame_count(); ++t) {
        per_frame[t] = dot(unit(b.edit_frames[t]), target);
    }
    return average(std::move(per_frame));
}

FrameAverage arcface_similarity(const EmbeddingBundle& b) {
    std::vector<std::optional<double>> per_frame(b.face_edit_frames.size());
    bool any = false;
    for (const auto& f : b.face_edit_frames) any = any || f.has_value();
    if (!any || b.face_key.empty()) throw NoFacesDetected("no face embeddings to compare");
    const Vec key = unit(b.face_key);
    for (std::size_t t = 0; t < b.face_edit_frames.size(); ++t) {
        if (b.face_edit_frames[t]) per_frame[t] = dot(unit(*b.face_edit_frames[t]), key);
    }
    return average(std::move(per_frame));
}

ChannelCorrelations eval_sync(const PairRecord& pair, const DspConfig& dsp) {
    return analyze_pair(pair, dsp).correlations;
}

std::string_view metric_label(Metric m) {
    switch (m) {
    case Metric::speech_corr: return "Speech Corr.";
    case Metric::gaze_corr: return "Gaze Corr.";
    case Metric::blink_corr: return "Blink Corr.";
    case Metric::pose_corr: return "Pose Corr.";
    case Metric::directional_clip_image: return "Directional CLIP (image)";
    case Metric::directional_clip_text_dual: return "Directional CLIP (text-dual)";
    case Metric::clip_text_align: return "CLIP-Text Align.";
    case Metric::arcface_sim: return "ArcFace Sim.";
    }
    return "?";
}

std::string_view metric_key(Metric m) {
    switch (m) {
    case Metric::speech_corr: return "speech_corr";
    case Metric::gaze_corr: return "gaze_corr";
    case Metric::blink_corr: return "blink_corr";
    case Metric::pose_corr: return "pose_corr";
    case Metric::directional_clip_image: return "directional_clip_image";
    case Metric::directional_clip_text_dual: return "directional_clip_text_dual";
    case Metric::clip_text_align: return "clip_text_align";
    case Metric::arcface_sim: return "arcface_sim";
    }
    return "?";
}

std::string_view metric_block(Metric m) {
    switch (m) {
    case Metric::speech_corr:
    case Metric::gaze_corr:
    case Metric::blink_corr:
    case Metric::pose_corr: return "Synchronization";
    case Metric::directional_clip_image:
    case Metric::directional_clip_text_dual:
    case Metric::clip_text_align: return "Edit Fidelity";
    case Metric::arcface_sim: return "Identity Preservation";
    }
    return "?";
}

MetricReport evaluate_pair(std::string pair_id, const PairRecord* pair,
                           const EmbeddingBundle* embeddings, const DspConfig& dsp,
                           bool with_traces) {
    if (embeddings) validate_embeddings(*embeddings);
    MetricReport report;
    report.pair_id = std::move(pair_id);
    if (with_traces) report.traces.resize(kMetricCount);
    auto idx = [](Metric m) { return static_cast<std::size_t>(m); };
    auto mark_na = [&](Metric m, std::string reason) { report.na_reason[idx(m)] = std::move(reason); };

    constexpr std::array<std::pair<Metric, Channel>, 4> sync_rows{{
        {Metric::speech_corr, Channel::speech},
        {Metric::gaze_corr, Channel::gaze},
        {Metric::blink_corr, Channel::blink},
        {Metric::pose_corr, Channel::pose},
    }};
    if (pair) {
        try {
            const ChannelCorrelations corr = eval_sync(*pair, dsp);
            for (auto [m, c] : sync_rows) report[m] = corr[c];
        } catch (const CoverageError& e) {
            for (auto [m, c] : sync_rows) mark_na(m, e.what());
        }
    } else {
        for (auto [m, c] : sync_rows) mark_na(m, "no landmark pair");
    }

    auto run = [&](Metric m, auto&& compute) {
        if (!embeddings) {
            mark_na(m, "no embedding bundle");
            return;
        }
        try {
            FrameAverage avg = compute(*embeddings);
            report[m] = avg.value;
            if (m == Metric::directional_clip_image) report.direction_skipped = avg.skipped;
            if (m == Metric::arcface_sim) report.face_skipped = avg.skipped;
            if (with_traces) report.traces[idx(m)] = std::move(avg.per_frame);
        } catch (const Error& e) {
            mark_na(m, e.what());
        }
    };
    run(Metric::directional_clip_image, directional_clip_image);
    run(Metric::directional_clip_text_dual, directional_clip_text_dual);
    run(Metric::clip_text_align, clip_text_align);
    run(Metric::arcface_sim, arcface_similarity);
    return report;
}

std::array<std::optional<double>, kMetricCount> aggregate_reports(
    std::span<const MetricReport> reports) {
    std::array<std::optional<double>, kMetricCount> out;
    for (std::size_t m = 0; m < kMetricCount; ++m) {
        double total = 0.0;
        std::size_t n = 0;
        for (const MetricReport& r : reports) {
            if (r.values[m]) {
                total += *r.values[m];
                ++n;
            }
        }
        if (n > 0) out[m] = total / static_cast<double>(n);
    }
    return out;
}

} // namespace syncurator
