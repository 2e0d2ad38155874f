#include "syncurator/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "syncurator/config.hpp"
#include "syncurator/errors.hpp"
#include "syncurator/reports.hpp"
#include "syncurator/synthbench.hpp"

namespace syncurator {

namespace fs = std::filesystem;

namespace {

/// Bad flags, unreadable config or unresolvable inputs.
class UsageError : public Error {
public:
    using Error::Error;
};

struct CommonOptions {
    std::string config_path;
    std::string weights;
    std::string drop_channel;
    std::string composition;
    std::optional<std::size_t> target_size;
    std::string ratio;
    std::optional<std::uint64_t> seed;
    std::optional<double> coverage_threshold;
    std::optional<unsigned> jobs;
    std::string out = ".";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "TOML or JSON config file")->envname("SYNCURATOR_CONFIG");
    cmd->add_option("--weights", o.weights, "channel weights s,g,b,p");
    cmd->add_option("--drop-channel", o.drop_channel, "leave-one-out channel (speech|gaze|blink|pose)");
    cmd->add_option("--composition", o.composition, "filtered|id_only|edit_only|random");
    cmd->add_option("--target-size", o.target_size, "manifest size");
    cmd->add_option("--ratio", o.ratio, "edited:identical ratio A:B");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--coverage-threshold", o.coverage_threshold, "minimum detection coverage per view");
    cmd->add_option("--jobs", o.jobs, "worker threads (default: logical cores)");
    cmd->add_option("--out", o.out, "output directory");
}

struct Resolved {
    RunConfig cfg;
    unsigned jobs = 1;
    fs::path out;
};

Resolved resolve(const CommonOptions& o) {
    Resolved r;
    std::optional<unsigned> file_jobs;
    try {
        if (!o.config_path.empty()) file_jobs = apply_config_file(r.cfg, o.config_path);
        if (!o.weights.empty()) r.cfg.weights = parse_weights(o.weights);
        if (!o.drop_channel.empty()) r.cfg.drop_channel = parse_channel(o.drop_channel);
        if (!o.composition.empty()) r.cfg.composition = parse_composition(o.composition);
        if (o.target_size) r.cfg.target_size = *o.target_size;
        if (!o.ratio.empty()) r.cfg.ratio = parse_ratio(o.ratio);
        if (o.seed) r.cfg.seed = *o.seed;
        if (o.coverage_threshold) r.cfg.coverage_threshold = *o.coverage_threshold;
        r.cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    unsigned jobs = o.jobs.value_or(file_jobs.value_or(0));
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    r.jobs = jobs;
    r.out = o.out;
    return r;
}

/// Files named directly, plus every file under a named directory whose
/// name ends in `suffix`. Sorted, without duplicates.
std::vector<fs::path> collect_inputs(const std::vector<std::string>& args, std::string_view suffix) {
    std::set<fs::path> found;
    for (const std::string& arg : args) {
        const fs::path p(arg);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            for (const auto& entry : fs::recursive_directory_iterator(p)) {
                const std::string name = entry.path().filename().string();
                if (entry.is_regular_file() && name.size() >= suffix.size() &&
                    name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
                    found.insert(entry.path().lexically_normal());
                }
            }
        } else if (fs::exists(p, ec)) {
            found.insert(p.lexically_normal());
        } else {
            throw UsageError("input not found: " + arg);
        }
    }
    return {found.begin(), found.end()};
}

template <typename Fn>
auto parallel_map(std::size_t n, unsigned jobs, Fn fn) {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> results(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) results[i] = fn(i);
    };
    const auto threads = static_cast<std::size_t>(std::min<std::size_t>(jobs, n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return results;
}

template <typename T>
struct Loaded {
    std::optional<T> value;
    InputError error;
};

template <typename T, typename Loader>
std::vector<Loaded<T>> load_all(const std::vector<fs::path>& paths, unsigned jobs, Loader load) {
    return parallel_map(paths.size(), jobs, [&](std::size_t i) {
        Loaded<T> r;
        try {
            r.value = load(paths[i]);
        } catch (const std::exception& e) {
            r.error = {paths[i].generic_string(), e.what()};
        }
        return r;
    });
}

/// Keeps the first record per id (inputs are path-sorted); later ones become errors.
template <typename T>
std::map<std::string, T> index_by_id(std::vector<Loaded<T>>& loaded, const std::vector<fs::path>& paths,
                                     std::vector<InputError>& errors) {
    std::map<std::string, T> out;
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        if (!loaded[i].value) {
            errors.push_back(loaded[i].error);
            continue;
        }
        const std::string id = loaded[i].value->pair_id;
        if (!out.emplace(id, std::move(*loaded[i].value)).second) {
            errors.push_back({paths[i].generic_string(), "duplicate pair_id '" + id + "'"});
        }
    }
    return out;
}

void report_errors(const std::vector<InputError>& errors, std::ostream& err) {
    for (const InputError& e : errors) err << "error: " << e.input << ": " << e.message << "\n";
}

int cmd_score(const CommonOptions& common, const std::vector<std::string>& inputs,
              std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(common);
    const auto paths = collect_inputs(inputs, ".pair.json");
    if (paths.empty()) throw UsageError("no pair files given");
    const ScoringWeights weights = r.cfg.effective_weights();

    struct Result {
        std::optional<PairScore> score;
        InputError error;
    };
    auto results = parallel_map(paths.size(), r.jobs, [&](std::size_t i) {
        Result res;
        try {
            res.score = score_pair(load_pair(paths[i]), weights, r.cfg.dsp, r.cfg.coverage_threshold);
        } catch (const std::exception& e) {
            res.error = {paths[i].generic_string(), e.what()};
        }
        return res;
    });

    std::vector<InputError> errors;
    std::map<std::string, PairScore> by_id;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!results[i].score) {
            errors.push_back(results[i].error);
            continue;
        }
        const std::string id = results[i].score->pair_id;
        if (!by_id.emplace(id, std::move(*results[i].score)).second) {
            errors.push_back({paths[i].generic_string(), "duplicate pair_id '" + id + "'"});
        }
    }
    std::vector<PairScore> scores;
    std::size_t discarded = 0;
    for (auto& [id, s] : by_id) {
        discarded += s.discarded ? 1 : 0;
        scores.push_back(std::move(s));
    }
    const fs::path dest = r.out / "scores.json";
    write_file(dest, scores_document(r.cfg, scores, errors));
    report_errors(errors, err);
    out << "scored " << scores.size() << " pairs (" << discarded << " discarded, " << errors.size()
        << " failed) -> " << dest.generic_string() << "\n";
    return errors.empty() ? kExitOk : kExitPartialFailure;
}

int cmd_filter(const CommonOptions& common, const std::string& scores_path, std::ostream& out,
               std::ostream& err) {
    const Resolved r = resolve(common);
    if (!fs::exists(scores_path)) throw UsageError("input not found: " + scores_path);
    std::vector<PairScore> scores;
    try {
        scores = parse_scores(read_file(scores_path));
    } catch (const Error& e) {
        err << "error: " << scores_path << ": " << e.what() << "\n";
        return kExitPartialFailure;
    }
    const ScoringWeights weights = r.cfg.effective_weights();
    PoolSummary pool;
    for (PairScore& s : scores) {
        s = rescore(std::move(s), weights);
        ++(s.discarded ? pool.discarded : pool.scored);
    }
    try {
        const CurationManifest manifest = build_manifest(scores, {}, r.cfg.target_size, r.cfg.ratio,
                                                         r.cfg.composition, r.cfg.seed);
        const fs::path dest = r.out / "manifest.json";
        write_file(dest, manifest_document(r.cfg, manifest, pool));
        out << "accepted " << manifest.accepted.size() << " pairs ("
            << manifest.count(PairKind::edited_pair) << " edited, "
            << manifest.count(PairKind::identical_pair) << " identical) -> " << dest.generic_string()
            << "\n";
        return kExitOk;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
}

int cmd_eval(const CommonOptions& common, const std::vector<std::string>& pair_args,
             const std::vector<std::string>& embedding_args, bool traces, std::ostream& out,
             std::ostream& err) {
    const Resolved r = resolve(common);
    const auto pair_paths = collect_inputs(pair_args, ".pair.json");
    const auto emb_paths = collect_inputs(embedding_args, ".emb.json");
    if (pair_paths.empty() && emb_paths.empty()) throw UsageError("no inputs given");

    auto loaded_pairs = load_all<PairRecord>(pair_paths, r.jobs, [](const fs::path& p) { return load_pair(p); });
    auto loaded_embs =
        load_all<EmbeddingBundle>(emb_paths, r.jobs, [](const fs::path& p) { return load_embeddings(p); });
    std::vector<InputError> errors;
    const auto pairs = index_by_id(loaded_pairs, pair_paths, errors);
    const auto embs = index_by_id(loaded_embs, emb_paths, errors);

    std::vector<std::string> ids;
    for (const auto& [id, _] : pairs) ids.push_back(id);
    for (const auto& [id, _] : embs) {
        if (!pairs.count(id)) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());

    auto reports = parallel_map(ids.size(), r.jobs, [&](std::size_t i) {
        const auto p = pairs.find(ids[i]);
        const auto e = embs.find(ids[i]);
        return evaluate_pair(ids[i], p == pairs.end() ? nullptr : &p->second,
                             e == embs.end() ? nullptr : &e->second, r.cfg.dsp, traces);
    });

    write_file(r.out / "metrics.json", metrics_document(r.cfg, reports, errors));
    write_file(r.out / "metrics.csv", metrics_csv(r.cfg, reports));
    report_errors(errors, err);
    out << "evaluated " << reports.size() << " pairs (" << errors.size() << " failed) -> "
        << (r.out / "metrics.json").generic_string() << "\n";
    return errors.empty() ? kExitOk : kExitPartialFailure;
}

std::string file_stem_id(const std::string& pair_id) {
    std::string out = pair_id;
    for (char& c : out) {
        if (c == '/' || c == '\\' || c == ':') c = '_';
    }
    return out;
}

int cmd_trace(const CommonOptions& common, const std::vector<std::string>& inputs,
              const std::vector<std::string>& stage_names, const std::vector<std::string>& channel_names,
              std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(common);
    TraceRequest request;
    try {
        for (const auto& s : stage_names) request.stages.insert(parse_stage(s));
        for (const auto& c : channel_names) request.channels.insert(parse_channel(c));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    const auto paths = collect_inputs(inputs, ".pair.json");
    if (paths.empty()) throw UsageError("no pair files given");
    int status = kExitOk;
    for (const fs::path& path : paths) {
        try {
            const PairRecord pair = load_pair(path);
            TraceResult trace = trace_csv(r.cfg, pair, request);
            const fs::path dest = r.out / (file_stem_id(pair.pair_id) + ".trace.csv");
            write_file(dest, trace.csv);
            for (const auto& p : trace.problems) err << "warning: " << pair.pair_id << ": " << p << "\n";
            if (!trace.problems.empty()) status = kExitPartialFailure;
            out << "trace " << pair.pair_id << " -> " << dest.generic_string() << "\n";
        } catch (const Error& e) {
            err << "error: " << path.generic_string() << ": " << e.what() << "\n";
            status = kExitPartialFailure;
        }
    }
    return status;
}

std::vector<int> parse_lags(std::string_view text) {
    std::vector<int> lags;
    auto parse_int = [&](std::string_view part) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc{} || ptr != part.data() + part.size()) {
            throw UsageError("invalid lag list '" + std::string(text) + "'");
        }
        return v;
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const std::string_view item = text.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
        auto dots = item.find("..");
        std::size_t sep_len = 2;
        if (dots == std::string_view::npos) {
            dots = item.find('-', 1);
            sep_len = 1;
        }
        if (dots == std::string_view::npos) {
            lags.push_back(parse_int(item));
        } else {
            const int lo = parse_int(item.substr(0, dots));
            const int hi = parse_int(item.substr(dots + sep_len));
            if (hi < lo) throw UsageError("empty lag range '" + std::string(item) + "'");
            for (int v = lo; v <= hi; ++v) lags.push_back(v);
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return lags;
}

struct SynthOptions {
    std::size_t seeds = 20;
    std::string lags = "0-9";
    double noise = 0.0;
    double dropout = 0.0;
    std::size_t frames = 81;
    double fps = 20.0;
    std::size_t identical = 0;
    bool embeddings = false;
    std::string embedding_format = "json";
};

int cmd_synth(const CommonOptions& common, const SynthOptions& o, std::ostream& out) {
    const Resolved r = resolve(common);
    const std::vector<int> lags = parse_lags(o.lags);
    if (o.embedding_format != "json" && o.embedding_format != "float32le") {
        throw UsageError("embedding format must be json or float32le");
    }

    std::vector<SynthSpec> specs;
    for (std::size_t k = 0; k < o.seeds; ++k) {
        for (int lag : lags) {
            SynthSpec s;
            s.n_frames = o.frames;
            s.fps = o.fps;
            s.seed = r.cfg.seed + k;
            s.lag_frames = lag;
            s.noise_sigma = o.noise;
            s.dropout_rate = o.dropout;
            specs.push_back(s);
        }
    }
    for (std::size_t k = 0; k < o.identical; ++k) {
        SynthSpec s;
        s.n_frames = o.frames;
        s.fps = o.fps;
        s.seed = r.cfg.seed + o.seeds + k;
        s.kind = PairKind::identical_pair;
        specs.push_back(s);
    }
    try {
        for (const SynthSpec& s : specs) s.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    const fs::path bundles = r.out / "bundles";
    const fs::path pairs = r.out / "pairs";
    nlohmann::ordered_json index = output_header(r.cfg);
    index["synth"] = {{"frames", o.frames}, {"fps", o.fps},       {"noise_sigma", o.noise},
                      {"dropout_rate", o.dropout}, {"seeds", o.seeds}, {"lags", lags},
                      {"identical", o.identical}};
    index["pairs"] = nlohmann::ordered_json::array();

    std::set<std::uint64_t> written_sources;
    for (const SynthSpec& s : specs) {
        const PairRecord pair = generate_pair(s);
        const std::string id = pair.pair_id;
        const std::string source_name = pair.source.video_id + ".source.json";
        if (written_sources.insert(s.seed).second) save_bundle(bundles / source_name, pair.source);
        const std::string edited_name = id + ".edited.json";
        save_bundle(bundles / edited_name, pair.edited);
        save_pair_file(pairs / (id + ".pair.json"),
                       PairFile{id, pair.kind, fs::path("..") / "bundles" / source_name,
                                fs::path("..") / "bundles" / edited_name});
        if (o.embeddings) {
            SynthEmbeddingOptions eo;
            eo.frames = s.n_frames;
            eo.seed = s.seed * 7919u + static_cast<std::uint64_t>(s.lag_frames + 1000);
            const EmbeddingBundle emb = synth_embeddings(id, eo);
            const fs::path dest = r.out / "embeddings" / (id + ".emb.json");
            if (o.embedding_format == "json") {
                write_file(dest, serialize_embeddings_json(emb));
            } else {
                save_embeddings_binary(dest, emb);
            }
        }
        index["pairs"].push_back({{"pair_id", id},
                                  {"kind", to_string(s.kind)},
                                  {"seed", s.seed},
                                  {"lag_frames", s.lag_frames}});
    }
    write_file(r.out / "synth.json", index.dump(2) + "\n");
    out << "generated " << specs.size() << " pairs -> " << pairs.generic_string() << "\n";
    return kExitOk;
}

int cmd_report(const CommonOptions& common, const std::vector<std::string>& inputs,
               std::vector<std::string> labels, int precision, std::ostream& out, std::ostream& err) {
    const Resolved r = resolve(common);
    if (inputs.empty()) throw UsageError("no metrics files given");
    if (!labels.empty() && labels.size() != inputs.size()) {
        throw UsageError("--labels needs one label per metrics file");
    }
    if (precision < 0 || precision > 12) throw UsageError("--precision must lie in [0, 12]");
    std::vector<std::array<std::optional<double>, kMetricCount>> columns;
    int status = kExitOk;
    std::vector<std::string> used_labels;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!fs::exists(inputs[i])) throw UsageError("input not found: " + inputs[i]);
        try {
            columns.push_back(parse_metric_summary(read_file(inputs[i])));
            used_labels.push_back(labels.empty() ? fs::path(inputs[i]).parent_path().filename().string()
                                                 : labels[i]);
        } catch (const Error& e) {
            err << "error: " << inputs[i] << ": " << e.what() << "\n";
            status = kExitPartialFailure;
        }
    }
    for (std::size_t i = 0; i < used_labels.size(); ++i) {
        if (used_labels[i].empty()) used_labels[i] = "run" + std::to_string(i + 1);
    }
    write_file(r.out / "report.csv",
               csv_header_comment(r.cfg) + comparison_csv(used_labels, columns, precision));
    nlohmann::ordered_json doc = output_header(r.cfg);
    doc["columns"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        nlohmann::ordered_json col{{"label", used_labels[i]}, {"metrics", nlohmann::ordered_json::object()}};
        for (Metric m : kMetrics) {
            const auto& v = columns[i][static_cast<std::size_t>(m)];
            col["metrics"][std::string(metric_key(m))] = v ? nlohmann::ordered_json(*v) : nullptr;
        }
        doc["columns"].push_back(std::move(col));
    }
    write_file(r.out / "report.json", doc.dump(2) + "\n");
    out << "report of " << columns.size() << " runs -> " << (r.out / "report.csv").generic_string()
        << "\n";
    return status;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Landmark-based synchronization scoring, dataset curation and evaluation",
                 std::string(kToolName)};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonOptions score_opts, filter_opts, eval_opts, trace_opts, synth_opts, report_opts;

    std::vector<std::string> score_inputs;
    auto* score = app.add_subcommand("score", "score pair files into scores.json");
    add_common(score, score_opts);
    score->add_option("inputs", score_inputs, "pair files or directories")->required();

    std::string scores_path;
    auto* filter = app.add_subcommand("filter", "build a curation manifest from scores.json");
    add_common(filter, filter_opts);
    filter->add_option("scores", scores_path, "scores file")->required();

    std::vector<std::string> eval_pairs, eval_embs;
    bool eval_traces = false;
    auto* eval = app.add_subcommand("eval", "compute the evaluation metric table");
    add_common(eval, eval_opts);
    eval->add_option("--pairs", eval_pairs, "pair files or directories");
    eval->add_option("--embeddings", eval_embs, "embedding files or directories");
    eval->add_flag("--traces", eval_traces, "include per-frame metric traces");

    std::vector<std::string> trace_inputs, trace_stages, trace_channels;
    auto* trace = app.add_subcommand("trace", "export per-frame channel signals as CSV");
    add_common(trace, trace_opts);
    trace->add_option("inputs", trace_inputs, "pair files or directories")->required();
    trace->add_option("--stage", trace_stages, "raw|interpolated|smoothed|normalized (default: all)")
        ->delimiter(',');
    trace->add_option("--channels", trace_channels, "speech,gaze,blink,pose (default: all)")->delimiter(',');

    SynthOptions synth_cfg;
    auto* synth = app.add_subcommand("synth", "generate synthetic pairs with injected lag");
    add_common(synth, synth_opts);
    synth->add_option("--seeds", synth_cfg.seeds, "number of seeds");
    synth->add_option("--lags", synth_cfg.lags, "lag list, e.g. 0-9 or 0,2,4");
    synth->add_option("--noise", synth_cfg.noise, "landmark noise sigma on the edited view");
    synth->add_option("--dropout", synth_cfg.dropout, "fraction of edited frames without detections");
    synth->add_option("--frames", synth_cfg.frames, "frames per clip");
    synth->add_option("--fps", synth_cfg.fps, "frame rate");
    synth->add_option("--identical", synth_cfg.identical, "number of identical pairs");
    synth->add_flag("--embeddings", synth_cfg.embeddings, "also write synthetic embedding bundles");
    synth->add_option("--embedding-format", synth_cfg.embedding_format, "json|float32le");

    std::vector<std::string> report_inputs, report_labels;
    int report_precision = 2;
    auto* report = app.add_subcommand("report", "compare metrics files side by side");
    add_common(report, report_opts);
    report->add_option("inputs", report_inputs, "metrics.json files")->required();
    report->add_option("--labels", report_labels, "column labels")->delimiter(',');
    report->add_option("--precision", report_precision, "decimals in report.csv");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*score) return cmd_score(score_opts, score_inputs, out, err);
        if (*filter) return cmd_filter(filter_opts, scores_path, out, err);
        if (*eval) return cmd_eval(eval_opts, eval_pairs, eval_embs, eval_traces, out, err);
        if (*trace) return cmd_trace(trace_opts, trace_inputs, trace_stages, trace_channels, out, err);
        if (*synth) return cmd_synth(synth_opts, synth_cfg, out);
        if (*report) return cmd_report(report_opts, report_inputs, report_labels, report_precision, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
    return kExitUsage;
}

} // namespace syncurator
