#include "syncurator/curation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "syncurator/errors.hpp"

namespace syncurator {

double& ScoringWeights::operator[](Channel c) {
    switch (c) {
    case Channel::speech: return speech;
    case Channel::gaze: return gaze;
    case Channel::blink: return blink;
    case Channel::pose: break;
    }
    return pose;
}

double ScoringWeights::operator[](Channel c) const {
    return const_cast<ScoringWeights&>(*this)[c];
}

void ScoringWeights::validate() const {
    for (Channel c : kChannels) {
        const double w = (*this)[c];
        if (!std::isfinite(w) || w < 0.0) {
            throw ConfigError("weight for " + std::string(to_string(c)) +
                              " must be a finite non-negative number");
        }
    }
    if (!(sum() > 0.0)) throw ConfigError("weights must not all be zero");
}

ScoringWeights ScoringWeights::normalized() const {
    validate();
    const double total = sum();
    ScoringWeights out = *this;
    for (Channel c : kChannels) out[c] /= total;
    return out;
}

ScoringWeights leave_one_out_weights(const ScoringWeights& base, Channel drop) {
    base.validate();
    ScoringWeights out = base;
    out[drop] = 0.0;
    if (!(out.sum() > 0.0)) {
        throw InvalidDrop("dropping " + std::string(to_string(drop)) +
                          " leaves every weight at zero");
    }
    return out.normalized();
}

double ChannelCorrelations::operator[](Channel c) const {
    return const_cast<ChannelCorrelations&>(*this)[c];
}

double& ChannelCorrelations::operator[](Channel c) {
    switch (c) {
    case Channel::speech: return speech;
    case Channel::gaze: return gaze;
    case Channel::blink: return blink;
    case Channel::pose: break;
    }
    return pose;
}

double channel_correlation(const ChannelSet& a, const ChannelSet& b, Channel channel) {
    const auto ca = a.components(channel);
    const auto cb = b.components(channel);
    double total = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) total += pearson_zero_lag(*ca[i], *cb[i]);
    return total / static_cast<double>(ca.size());
}

ChannelSet process_channels(const ChannelSet& raw, const DspConfig& dsp) {
    ChannelSet out = raw;
    for (ChannelSignal* s : out.all()) {
        try {
            *s = process_signal(std::move(*s), dsp);
        } catch (const TooSparse& e) {
            throw CoverageError(std::string("too sparse: ") + e.what());
        }
    }
    return out;
}

double weighted_sync_score(const ChannelCorrelations& corr, const ScoringWeights& weights) {
    const ScoringWeights w = weights.normalized();
    double score = 0.0;
    for (Channel c : kChannels) score += w[c] * corr[c];
    return score;
}

PairAnalysis analyze_pair(const PairRecord& pair, const DspConfig& dsp) {
    dsp.validate();
    if (pair.source.frame_count() != pair.edited.frame_count()) {
        throw LengthMismatch("pair '" + pair.pair_id + "': views differ in length");
    }
    Diagnostics diag;
    auto process_view = [&](const LandmarkBundle& bundle) {
        try {
            return process_channels(extract_channels(bundle, &diag), dsp);
        } catch (const CoverageError& e) {
            throw CoverageError(std::string(to_string(bundle.view)) + " view " + e.what());
        }
    };
    const ChannelSet source = process_view(pair.source);
    const ChannelSet edited = process_view(pair.edited);

    PairAnalysis out;
    for (Channel c : kChannels) {
        out.correlations[c] = channel_correlation(source, edited, c);
    }
    const auto src_all = source.all();
    const auto edit_all = edited.all();
    for (std::size_t i = 0; i < src_all.size(); ++i) {
        out.components.push_back(
            {src_all[i]->component, pearson_zero_lag(*src_all[i], *edit_all[i])});
    }
    out.geometry_warnings = diag.size();
    return out;
}

namespace {

std::string coverage_reason(Subsystem subsystem, View view, double coverage, double threshold) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s detection coverage %.4f below %.4f (%s view)",
                  std::string(to_string(subsystem)).c_str(), coverage, threshold,
                  std::string(to_string(view)).c_str());
    return buf;
}

} // namespace

PairScore score_pair(const PairRecord& pair, const ScoringWeights& weights, const DspConfig& dsp,
                     double coverage_threshold) {
    PairScore score;
    score.pair_id = pair.pair_id;
    score.kind = pair.kind;
    score.coverage_face = std::min(detection_coverage(pair.source, Subsystem::face),
                                   detection_coverage(pair.edited, Subsystem::face));
    score.coverage_pose = std::min(detection_coverage(pair.source, Subsystem::pose),
                                   detection_coverage(pair.edited, Subsystem::pose));

    for (const LandmarkBundle* view : {&pair.source, &pair.edited}) {
        for (Subsystem sub : {Subsystem::face, Subsystem::pose}) {
            const double cov = detection_coverage(*view, sub);
            if (cov < coverage_threshold) {
                score.discarded = true;
                score.discard_reason = coverage_reason(sub, view->view, cov, coverage_threshold);
                return score;
            }
        }
    }

    try {
        PairAnalysis analysis = analyze_pair(pair, dsp);
        score.correlations = analysis.correlations;
        score.components = std::move(analysis.components);
        score.geometry_warnings = analysis.geometry_warnings;
        score.sync_score = weighted_sync_score(*score.correlations, weights);
    } catch (const CoverageError& e) {
        score.discarded = true;
        score.discard_reason = e.what();
    }
    return score;
}

PairScore rescore(PairScore score, const ScoringWeights& weights) {
    if (score.correlations) score.sync_score = weighted_sync_score(*score.correlations, weights);
    return score;
}

namespace {

bool ranks_before(const std::optional<double>& sa, const std::string& ia,
                  const std::optional<double>& sb, const std::string& ib) {
    if (sa.has_value() != sb.has_value()) return sa.has_value();
    if (sa && *sa != *sb) return *sa > *sb;
    return ia < ib;
}

} // namespace

void rank_scores(std::vector<PairScore>& scores) {
    std::sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        return ranks_before(a.sync_score, a.pair_id, b.sync_score, b.pair_id);
    });
}

std::string_view to_string(Composition composition) {
    switch (composition) {
    case Composition::filtered: return "filtered";
    case Composition::id_only: return "id_only";
    case Composition::edit_only: return "edit_only";
    case Composition::random: return "random";
    }
    return "?";
}

Composition parse_composition(std::string_view text) {
    for (Composition c : {Composition::filtered, Composition::id_only, Composition::edit_only,
                          Composition::random}) {
        if (to_string(c) == text) return c;
    }
    throw ConfigError("unknown composition '" + std::string(text) + "'");
}

Ratio parse_ratio(std::string_view text) {
    const auto colon = text.find(':');
    Ratio r;
    auto parse_int = [&](std::string_view part, int& out) {
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        return ec == std::errc{} && ptr == part.data() + part.size() && out >= 0;
    };
    if (colon == std::string_view::npos || !parse_int(text.substr(0, colon), r.edited) ||
        !parse_int(text.substr(colon + 1), r.identical) || r.edited + r.identical == 0) {
        throw ConfigError("ratio must look like A:B with non-negative integers, got '" +
                          std::string(text) + "'");
    }
    return r;
}

std::string to_string(const Ratio& ratio) {
    return std::to_string(ratio.edited) + ":" + std::to_string(ratio.identical);
}

std::size_t CurationManifest::count(PairKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        accepted.begin(), accepted.end(), [&](const ManifestEntry& e) { return e.kind == kind; }));
}

std::pair<std::size_t, std::size_t> split_by_ratio(std::size_t target_size, Ratio ratio) {
    const std::size_t parts = static_cast<std::size_t>(ratio.edited + ratio.identical);
    if (ratio.edited < 0 || ratio.identical < 0 || parts == 0) {
        throw ConfigError("ratio parts must be non-negative and not both zero");
    }
    const std::size_t edited =
        (target_size * static_cast<std::size_t>(ratio.edited) + parts / 2) / parts;
    return {edited, target_size - edited};
}

CurationManifest build_manifest(const std::vector<PairScore>& scores,
                                const std::map<std::string, PairKind>& kinds,
                                std::size_t target_size, Ratio ratio, Composition composition,
                                std::uint64_t seed) {
    if (scores.empty()) throw InsufficientPairs("no scored pairs", target_size, 0);

    std::vector<ManifestEntry> pool;
    pool.reserve(scores.size());
    std::set<std::string> seen;
    for (const PairScore& s : scores) {
        if (!seen.insert(s.pair_id).second) {
            throw SchemaError("duplicate pair_id '" + s.pair_id + "' in scores");
        }
        auto it = kinds.find(s.pair_id);
        pool.push_back({s.pair_id, it != kinds.end() ? it->second : s.kind,
                        s.discarded ? std::nullopt : s.sync_score});
    }
    auto by_rank = [](const ManifestEntry& a, const ManifestEntry& b) {
        return ranks_before(a.sync_score, a.pair_id, b.sync_score, b.pair_id);
    };
    std::sort(pool.begin(), pool.end(), by_rank);

    CurationManifest manifest;
    manifest.target_size = target_size;
    manifest.ratio = ratio;
    manifest.composition = composition;
    manifest.seed = seed;

    auto top_of_kind = [&](PairKind kind, std::size_t n) {
        std::vector<ManifestEntry> out;
        for (const ManifestEntry& e : pool) {
            if (out.size() == n) break;
            if (e.kind == kind && e.sync_score) out.push_back(e);
        }
        return out;
    };
    auto shortfall_message = [](std::size_t edited_short, std::size_t identical_short) {
        return "insufficient pairs: short by " + std::to_string(edited_short) +
               " edited and " + std::to_string(identical_short) + " identical";
    };

    switch (composition) {
    case Composition::filtered: {
        const auto [want_edited, want_identical] = split_by_ratio(target_size, ratio);
        auto edited = top_of_kind(PairKind::edited_pair, want_edited);
        auto identical = top_of_kind(PairKind::identical_pair, want_identical);
        const std::size_t edited_short = want_edited - edited.size();
        const std::size_t identical_short = want_identical - identical.size();
        if (edited_short > 0 || identical_short > 0) {
            throw InsufficientPairs(shortfall_message(edited_short, identical_short),
                                    edited_short, identical_short);
        }
        manifest.accepted = std::move(edited);
        manifest.accepted.insert(manifest.accepted.end(), identical.begin(), identical.end());
        break;
    }
    case Composition::id_only:
    case Composition::edit_only: {
        const PairKind kind = composition == Composition::id_only ? PairKind::identical_pair
                                                                  : PairKind::edited_pair;
        manifest.accepted = top_of_kind(kind, target_size);
        const std::size_t shortfall = target_size - manifest.accepted.size();
        if (shortfall > 0) {
            const bool is_edited = kind == PairKind::edited_pair;
            throw InsufficientPairs(shortfall_message(is_edited ? shortfall : 0,
                                                      is_edited ? 0 : shortfall),
                                    is_edited ? shortfall : 0, is_edited ? 0 : shortfall);
        }
        break;
    }
    case Composition::random: {
        // Unfiltered baseline: every pair is eligible, scores are ignored.
        if (pool.size() < target_size) {
            throw InsufficientPairs("insufficient pairs: random sample of " +
                                        std::to_string(target_size) + " from " +
                                        std::to_string(pool.size()),
                                    target_size - pool.size(), 0);
        }
        std::vector<ManifestEntry> candidates = pool;
        std::sort(candidates.begin(), candidates.end(),
                  [](const ManifestEntry& a, const ManifestEntry& b) { return a.pair_id < b.pair_id; });
        std::mt19937_64 rng(seed);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        candidates.resize(target_size);
        manifest.accepted = std::move(candidates);
        break;
    }
    }
    std::sort(manifest.accepted.begin(), manifest.accepted.end(), by_rank);
    return manifest;
}

} // namespace syncurator
