#include <bit>
#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "syncurator/errors.hpp"
#include "syncurator/evalmetrics.hpp"

namespace syncurator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void validate_embeddings(const EmbeddingBundle& b) {
    const std::size_t frames = b.edit_frames.size();
    if (frames == 0) throw SchemaError(b.pair_id + ": embedding bundle has no frames");
    if (b.src_frames.size() != frames || b.face_edit_frames.size() != frames) {
        throw SchemaError(b.pair_id + ": per-frame arrays disagree on frame count");
    }
    const std::size_t dim = b.key.size();
    if (dim == 0) throw SchemaError(b.pair_id + ": empty key embedding");

    auto check = [&](const Embedding& e, std::size_t want, const std::string& what) {
        if (e.size() != want) {
            throw SchemaError(b.pair_id + ": " + what + " has dimension " +
                              std::to_string(e.size()) + ", expected " + std::to_string(want));
        }
        double ss = 0.0;
        for (float x : e) {
            if (!std::isfinite(x)) throw SchemaError(b.pair_id + ": " + what + " is not finite");
            ss += static_cast<double>(x) * x;
        }
        if (ss == 0.0) throw SchemaError(b.pair_id + ": " + what + " is the zero vector");
    };
    check(b.key, dim, "key");
    check(b.src_first, dim, "src_first");
    for (std::size_t t = 0; t < frames; ++t) {
        check(b.src_frames[t], dim, "src_frames[" + std::to_string(t) + "]");
        check(b.edit_frames[t], dim, "edit_frames[" + std::to_string(t) + "]");
    }
    // Text and image embeddings live in one joint space.
    if (b.text_source) check(*b.text_source, dim, "text_source");
    if (b.text_target) check(*b.text_target, dim, "text_target");

    const std::size_t face_dim = b.face_key.size();
    for (std::size_t t = 0; t < frames; ++t) {
        if (!b.face_edit_frames[t]) continue;
        if (face_dim == 0) throw SchemaError(b.pair_id + ": face frames present without face_key");
        check(*b.face_edit_frames[t], face_dim, "face_edit_frames[" + std::to_string(t) + "]");
    }
    if (face_dim > 0) check(b.face_key, face_dim, "face_key");
}

namespace {

Embedding vector_from_json(const json& node, const char* what) {
    if (!node.is_array()) throw SchemaError(std::string(what) + " must be an array of numbers");
    Embedding out;
    out.reserve(node.size());
    for (const json& x : node) {
        if (!x.is_number()) throw SchemaError(std::string(what) + " must be an array of numbers");
        out.push_back(x.get<float>());
    }
    return out;
}

std::vector<Embedding> rows_from_json(const json& node, const char* what) {
    if (!node.is_array()) throw SchemaError(std::string(what) + " must be an array of vectors");
    std::vector<Embedding> out;
    for (const json& row : node) out.push_back(vector_from_json(row, what));
    return out;
}

const json& field(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw SchemaError(std::string("missing field '") + key + "'");
    return *it;
}

std::size_t size_field(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (!v.is_number_unsigned()) {
        throw SchemaError(std::string("field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

std::string optional_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

class PayloadReader {
public:
    explicit PayloadReader(std::string bytes) : bytes_(std::move(bytes)) {}

    Embedding take(std::size_t n) {
        if (n > (bytes_.size() - pos_) / 4) throw ParseError("embedding payload is truncated");
        Embedding out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits = 0;
            for (int k = 3; k >= 0; --k) {
                bits = (bits << 8) | static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(k)]);
            }
            out[i] = std::bit_cast<float>(bits);
            pos_ += 4;
        }
        return out;
    }

    bool exhausted() const noexcept { return pos_ == bytes_.size(); }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

void append_le(std::string& out, const Embedding& v) {
    for (float x : v) {
        const auto bits = std::bit_cast<std::uint32_t>(x);
        for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
    }
}

ordered_json header_json(const EmbeddingBundle& b) {
    ordered_json doc;
    doc["pair_id"] = b.pair_id;
    doc["models"] = {{"image", b.image_model}, {"face", b.face_model}};
    doc["frames"] = b.frame_count();
    doc["dims"] = {{"image", b.key.size()}, {"face", b.face_key.size()}};
    ordered_json present = ordered_json::array();
    for (const auto& f : b.face_edit_frames) present.push_back(f.has_value());
    doc["face_present"] = std::move(present);
    doc["has_text_source"] = b.text_source.has_value();
    doc["has_text_target"] = b.text_target.has_value();
    return doc;
}

} // namespace

EmbeddingBundle parse_embeddings(std::string_view json_bytes, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_bytes.begin(), json_bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object()) throw SchemaError("embedding file must be a JSON object");

    EmbeddingBundle b;
    const json& pair_id = field(doc, "pair_id");
    if (!pair_id.is_string()) throw SchemaError("field 'pair_id' must be a string");
    b.pair_id = pair_id.get<std::string>();
    if (auto it = doc.find("models"); it != doc.end() && it->is_object()) {
        b.image_model = optional_string(*it, "image");
        b.face_model = optional_string(*it, "face");
    }
    const std::string encoding = doc.value("encoding", std::string("json"));

    if (encoding == "json") {
        b.src_frames = rows_from_json(field(doc, "src_frames"), "src_frames");
        b.edit_frames = rows_from_json(field(doc, "edit_frames"), "edit_frames");
        b.key = vector_from_json(field(doc, "key"), "key");
        b.src_first = vector_from_json(field(doc, "src_first"), "src_first");
        const json& faces = field(doc, "face_edit_frames");
        if (!faces.is_array()) throw SchemaError("face_edit_frames must be an array");
        for (const json& f : faces) {
            b.face_edit_frames.push_back(f.is_null() ? std::nullopt
                                                     : std::optional(vector_from_json(f, "face_edit_frames")));
        }
        if (auto it = doc.find("face_key"); it != doc.end() && !it->is_null()) {
            b.face_key = vector_from_json(*it, "face_key");
        }
        for (auto [key, slot] : {std::pair{"text_source", &b.text_source},
                                 std::pair{"text_target", &b.text_target}}) {
            if (auto it = doc.find(key); it != doc.end() && !it->is_null()) {
                *slot = vector_from_json(*it, key);
            }
        }
    } else if (encoding == "float32le") {
        const std::size_t frames = size_field(doc, "frames");
        const json& dims = field(doc, "dims");
        const std::size_t dim = size_field(dims, "image");
        const std::size_t face_dim = size_field(dims, "face");
        const json& present = field(doc, "face_present");
        if (!present.is_array() || present.size() != frames) {
            throw SchemaError("face_present must list one flag per frame");
        }
        const json& payload_name = field(doc, "payload");
        if (!payload_name.is_string()) throw SchemaError("field 'payload' must be a path");
        std::filesystem::path payload_path = payload_name.get<std::string>();
        if (payload_path.is_relative()) payload_path = base_dir / payload_path;
        PayloadReader reader(read_file(payload_path));

        for (std::size_t t = 0; t < frames; ++t) b.src_frames.push_back(reader.take(dim));
        for (std::size_t t = 0; t < frames; ++t) b.edit_frames.push_back(reader.take(dim));
        b.key = reader.take(dim);
        b.src_first = reader.take(dim);
        for (std::size_t t = 0; t < frames; ++t) {
            if (!present[t].is_boolean()) throw SchemaError("face_present entries must be booleans");
            b.face_edit_frames.push_back(present[t].get<bool>() ? std::optional(reader.take(face_dim))
                                                                : std::nullopt);
        }
        b.face_key = reader.take(face_dim);
        if (doc.value("has_text_source", false)) b.text_source = reader.take(dim);
        if (doc.value("has_text_target", false)) b.text_target = reader.take(dim);
        if (!reader.exhausted()) throw ParseError("embedding payload has trailing bytes");
    } else {
        throw SchemaError("unknown embedding encoding '" + encoding + "'");
    }
    validate_embeddings(b);
    return b;
}

EmbeddingBundle load_embeddings(const std::filesystem::path& path) {
    try {
        return parse_embeddings(read_file(path), path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

std::string serialize_embeddings_json(const EmbeddingBundle& b) {
    ordered_json doc = header_json(b);
    doc["encoding"] = "json";
    doc["src_frames"] = b.src_frames;
    doc["edit_frames"] = b.edit_frames;
    doc["key"] = b.key;
    doc["src_first"] = b.src_first;
    ordered_json faces = ordered_json::array();
    for (const auto& f : b.face_edit_frames) faces.push_back(f ? ordered_json(*f) : ordered_json(nullptr));
    doc["face_edit_frames"] = std::move(faces);
    doc["face_key"] = b.face_key;
    doc["text_source"] = b.text_source ? ordered_json(*b.text_source) : ordered_json(nullptr);
    doc["text_target"] = b.text_target ? ordered_json(*b.text_target) : ordered_json(nullptr);
    return doc.dump();
}

void save_embeddings_binary(const std::filesystem::path& json_path, const EmbeddingBundle& b) {
    validate_embeddings(b);
    std::string payload;
    for (const auto& e : b.src_frames) append_le(payload, e);
    for (const auto& e : b.edit_frames) append_le(payload, e);
    append_le(payload, b.key);
    append_le(payload, b.src_first);
    for (const auto& f : b.face_edit_frames) {
        if (f) append_le(payload, *f);
    }
    append_le(payload, b.face_key);
    if (b.text_source) append_le(payload, *b.text_source);
    if (b.text_target) append_le(payload, *b.text_target);

    std::filesystem::path payload_path = json_path;
    payload_path.replace_extension(".bin");
    ordered_json doc = header_json(b);
    doc["encoding"] = "float32le";
    doc["payload"] = payload_path.filename().string();
    write_file(payload_path, payload);
    write_file(json_path, doc.dump(2) + "\n");
}

} // namespace syncurator
