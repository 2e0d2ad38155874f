#include "syncurator/landmarks.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "syncurator/errors.hpp"

namespace syncurator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(View view) {
    return view == View::source ? "source" : "edited";
}

std::string_view to_string(PairKind kind) {
    return kind == PairKind::edited_pair ? "edited_pair" : "identical_pair";
}

std::string_view to_string(Subsystem subsystem) {
    return subsystem == Subsystem::face ? "face" : "pose";
}

View parse_view(std::string_view text) {
    if (text == "source") return View::source;
    if (text == "edited") return View::edited;
    throw SchemaError("unknown view '" + std::string(text) + "'");
}

PairKind parse_pair_kind(std::string_view text) {
    if (text == "edited_pair") return PairKind::edited_pair;
    if (text == "identical_pair") return PairKind::identical_pair;
    throw SchemaError("unknown pair kind '" + std::string(text) + "'");
}

namespace {

template <std::size_t N>
void check_points(const std::array<LandmarkPoint, N>& points, std::size_t frame,
                  std::string_view what) {
    for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y)) {
            throw SchemaError("frame " + std::to_string(frame) + ": " + std::string(what) +
                              " landmark " + std::to_string(i) + " is not finite");
        }
    }
}

template <std::size_t N>
std::array<LandmarkPoint, N> points_from_json(const json& node, std::size_t frame,
                                              std::string_view what) {
    if (!node.is_array()) {
        throw SchemaError("frame " + std::to_string(frame) + ": " + std::string(what) +
                          " must be an array or null");
    }
    if (node.size() != N) {
        throw SchemaError("frame " + std::to_string(frame) + ": " + std::string(what) +
                          " has " + std::to_string(node.size()) + " landmarks, expected " +
                          std::to_string(N));
    }
    std::array<LandmarkPoint, N> points{};
    for (std::size_t i = 0; i < N; ++i) {
        const json& p = node[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw SchemaError("frame " + std::to_string(frame) + ": " + std::string(what) +
                              " landmark " + std::to_string(i) + " must be [x, y]");
        }
        points[i] = {p[0].get<double>(), p[1].get<double>()};
    }
    return points;
}

template <std::size_t N>
ordered_json points_to_json(const std::array<LandmarkPoint, N>& points) {
    ordered_json arr = ordered_json::array();
    arr.get_ref<ordered_json::array_t&>().reserve(N);
    for (const auto& p : points) arr.push_back({p.x, p.y});
    return arr;
}

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key) {
    const json& v = require(obj, key);
    if (!v.is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

json parse_json(std::string_view bytes) {
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
}

} // namespace

void validate_bundle(const LandmarkBundle& bundle) {
    if (!(bundle.fps > 0.0) || !std::isfinite(bundle.fps)) {
        throw SchemaError("fps must be a positive number");
    }
    if (bundle.frames.empty()) throw SchemaError("bundle has no frames");
    for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
        const LandmarkFrame& frame = bundle.frames[i];
        if (frame.frame_index != i) {
            throw SchemaError("frame_index sequence broken at position " + std::to_string(i) +
                              ": got " + std::to_string(frame.frame_index) + ", expected " +
                              std::to_string(i));
        }
        if (frame.face) check_points(*frame.face, i, "face");
        if (frame.pose) check_points(*frame.pose, i, "pose");
    }
}

LandmarkBundle parse_bundle(std::string_view bytes) {
    const json doc = parse_json(bytes);
    if (!doc.is_object()) throw SchemaError("bundle must be a JSON object");

    LandmarkBundle bundle;
    bundle.video_id = require_string(doc, "video_id");
    bundle.view = parse_view(require_string(doc, "view"));
    const json& fps = require(doc, "fps");
    if (!fps.is_number()) throw SchemaError("field 'fps' must be a number");
    bundle.fps = fps.get<double>();

    const json& frames = require(doc, "frames");
    if (!frames.is_array()) throw SchemaError("field 'frames' must be an array");
    bundle.frames.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const json& f = frames[i];
        if (!f.is_object()) throw SchemaError("frame " + std::to_string(i) + " must be an object");
        const json& idx = require(f, "frame_index");
        if (!idx.is_number_integer() || idx.get<long long>() < 0) {
            throw SchemaError("frame " + std::to_string(i) +
                              ": frame_index must be a non-negative integer");
        }
        LandmarkFrame frame;
        frame.frame_index = idx.get<std::size_t>();
        if (auto it = f.find("face"); it != f.end() && !it->is_null()) {
            frame.face = points_from_json<kFaceLandmarkCount>(*it, i, "face");
        }
        if (auto it = f.find("pose"); it != f.end() && !it->is_null()) {
            frame.pose = points_from_json<kPoseLandmarkCount>(*it, i, "pose");
        }
        bundle.frames.push_back(std::move(frame));
    }
    validate_bundle(bundle);
    return bundle;
}

std::string serialize_bundle(const LandmarkBundle& bundle) {
    ordered_json doc;
    doc["video_id"] = bundle.video_id;
    doc["view"] = to_string(bundle.view);
    doc["fps"] = bundle.fps;
    ordered_json frames = ordered_json::array();
    for (const LandmarkFrame& frame : bundle.frames) {
        ordered_json f;
        f["frame_index"] = frame.frame_index;
        f["face"] = frame.face ? points_to_json(*frame.face) : ordered_json(nullptr);
        f["pose"] = frame.pose ? points_to_json(*frame.pose) : ordered_json(nullptr);
        frames.push_back(std::move(f));
    }
    doc["frames"] = std::move(frames);
    return doc.dump();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + path.string());
}

LandmarkBundle load_bundle(const std::filesystem::path& path) {
    try {
        return parse_bundle(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void save_bundle(const std::filesystem::path& path, const LandmarkBundle& bundle) {
    write_file(path, serialize_bundle(bundle));
}

double detection_coverage(const LandmarkBundle& bundle, Subsystem subsystem) {
    if (bundle.frames.empty()) return 0.0;
    std::size_t present = 0;
    for (const LandmarkFrame& frame : bundle.frames) {
        present += subsystem == Subsystem::face ? frame.face.has_value() : frame.pose.has_value();
    }
    return static_cast<double>(present) / static_cast<double>(bundle.frames.size());
}

PairRecord make_pair_record(std::string pair_id, LandmarkBundle source, LandmarkBundle edited,
                            PairKind kind) {
    if (source.frame_count() != edited.frame_count()) {
        throw SchemaError("pair '" + pair_id + "': source has " +
                          std::to_string(source.frame_count()) + " frames, edited has " +
                          std::to_string(edited.frame_count()));
    }
    return PairRecord{std::move(pair_id), std::move(source), std::move(edited), kind};
}

PairFile parse_pair_file(std::string_view bytes) {
    const json doc = parse_json(bytes);
    if (!doc.is_object()) throw SchemaError("pair file must be a JSON object");
    PairFile file;
    file.pair_id = require_string(doc, "pair_id");
    file.kind = parse_pair_kind(require_string(doc, "kind"));
    file.source = require_string(doc, "source");
    file.edited = require_string(doc, "edited");
    return file;
}

std::string serialize_pair_file(const PairFile& file) {
    ordered_json doc;
    doc["pair_id"] = file.pair_id;
    doc["kind"] = to_string(file.kind);
    doc["source"] = file.source.generic_string();
    doc["edited"] = file.edited.generic_string();
    return doc.dump(2) + "\n";
}

void save_pair_file(const std::filesystem::path& path, const PairFile& file) {
    write_file(path, serialize_pair_file(file));
}

PairRecord load_pair(const std::filesystem::path& pair_path) {
    PairFile file;
    try {
        file = parse_pair_file(read_file(pair_path));
    } catch (const ParseError& e) {
        throw ParseError(pair_path.string() + ": " + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(pair_path.string() + ": " + e.what());
    }
    const auto base = pair_path.parent_path();
    auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : base / p; };
    LandmarkBundle source = load_bundle(resolve(file.source));
    LandmarkBundle edited = load_bundle(resolve(file.edited));
    if (source.view != View::source || edited.view != View::edited) {
        throw SchemaError(pair_path.string() + ": bundle views must be source and edited");
    }
    return make_pair_record(std::move(file.pair_id), std::move(source), std::move(edited),
                            file.kind);
}

} // namespace syncurator
