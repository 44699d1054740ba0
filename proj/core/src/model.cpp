#include "sstem/model.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "sstem/error.hpp"
#include "sstem/hashing.hpp"

namespace sstem {

using nlohmann::json;

std::string_view to_string(SplitRole role) {
  return role == SplitRole::kOptimization ? "optimization" : "validation";
}

std::optional<SplitRole> parse_split_role(std::string_view text) {
  if (text == "optimization") return SplitRole::kOptimization;
  if (text == "validation") return SplitRole::kValidation;
  return std::nullopt;
}

std::string_view to_string(TemporalForm form) {
  return form == TemporalForm::kDirect ? "direct" : "penalty";
}

std::optional<TemporalForm> parse_temporal_form(std::string_view text) {
  if (text == "direct") return TemporalForm::kDirect;
  if (text == "penalty") return TemporalForm::kPenalty;
  return std::nullopt;
}

const VideoEntry* DatasetManifest::find(std::string_view video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return &v;
  }
  return nullptr;
}

std::vector<ManifestViolation> validate_manifest(const DatasetManifest& manifest) {
  std::vector<ManifestViolation> out;
  if (manifest.dataset_id.empty()) {
    out.push_back({"dataset_id", "", "dataset_id must be non-empty"});
  }

  std::set<std::string> seen;
  std::set<std::string> reported_dupes;
  for (const auto& v : manifest.videos) {
    if (v.video_id.empty()) {
      out.push_back({"video_id", "", "video_id must be non-empty"});
    } else if (!seen.insert(v.video_id).second && reported_dupes.insert(v.video_id).second) {
      out.push_back({"video_id", v.video_id, "duplicate video_id"});
    }
    if (v.edit_prompt.empty()) {
      out.push_back({"edit_prompt", v.video_id, "edit_prompt must be non-empty"});
    }
    if (v.original_path.empty()) {
      out.push_back({"original_path", v.video_id, "original_path must be non-empty"});
    }
    if (v.edited_path.empty()) {
      out.push_back({"edited_path", v.video_id, "edited_path must be non-empty"});
    }
  }

  std::size_t n_opt = 0;
  std::size_t n_val = 0;
  for (const auto& [id, role] : manifest.split) {
    if (!seen.contains(id)) {
      out.push_back({"split", id, "split refers to unknown video_id"});
    }
    (role == SplitRole::kOptimization ? n_opt : n_val)++;
  }
  if (n_opt == 0 && n_val == 0) {
    out.push_back({"split", "", "optimization and validation partitions are both empty"});
  }
  return out;
}

namespace {

std::string require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kParseError, where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetManifest parse_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "manifest: top level must be an object");

  DatasetManifest m;
  m.dataset_id = require_string(doc, "dataset_id", "manifest");
  if (!doc.contains("videos") || !doc["videos"].is_array()) {
    throw Error(ErrorCode::kParseError, "manifest: 'videos' must be an array");
  }
  for (const auto& v : doc["videos"]) {
    if (!v.is_object()) throw Error(ErrorCode::kParseError, "manifest: video entries must be objects");
    VideoEntry e;
    e.video_id = require_string(v, "video_id", "videos[]");
    e.original_path = require_string(v, "original_path", "videos[" + e.video_id + "]");
    e.edited_path = require_string(v, "edited_path", "videos[" + e.video_id + "]");
    e.edit_prompt = require_string(v, "edit_prompt", "videos[" + e.video_id + "]");
    e.model_name = require_string(v, "model_name", "videos[" + e.video_id + "]");
    m.videos.push_back(std::move(e));
  }
  if (doc.contains("split")) {
    if (!doc["split"].is_object()) throw Error(ErrorCode::kParseError, "manifest: 'split' must be an object");
    for (const auto& [id, role] : doc["split"].items()) {
      auto parsed = role.is_string() ? parse_split_role(role.get<std::string>()) : std::nullopt;
      if (!parsed) {
        throw Error(ErrorCode::kParseError,
                    "manifest: split['" + id + "'] must be \"optimization\" or \"validation\"");
      }
      m.split.emplace(id, *parsed);
    }
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  json doc;
  doc["dataset_id"] = manifest.dataset_id;
  doc["videos"] = json::array();
  for (const auto& v : manifest.videos) {
    doc["videos"].push_back({{"video_id", v.video_id},
                             {"original_path", v.original_path},
                             {"edited_path", v.edited_path},
                             {"edit_prompt", v.edit_prompt},
                             {"model_name", v.model_name}});
  }
  doc["split"] = json::object();
  for (const auto& [id, role] : manifest.split) doc["split"][id] = to_string(role);
  return doc.dump(2) + "\n";
}

std::filesystem::path resolve_media_path(const std::filesystem::path& manifest_dir,
                                         const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || manifest_dir.empty()) return p;
  return manifest_dir / p;
}

std::string hash_image(const RgbImage& image) {
  std::array<std::uint8_t, 8> dims{};
  const auto w = static_cast<std::uint32_t>(image.width);
  const auto h = static_cast<std::uint32_t>(image.height);
  for (int i = 0; i < 4; ++i) {
    dims[i] = static_cast<std::uint8_t>(w >> (8 * i));
    dims[4 + i] = static_cast<std::uint8_t>(h >> (8 * i));
  }
  Sha256 sha;
  sha.update(dims.data(), dims.size());
  sha.update(image.pixels.data(), image.pixels.size());
  return sha.hex_digest();
}

Frame Frame::from_image(std::uint64_t index, RgbImage image) {
  Frame f;
  f.index = index;
  f.content_hash = hash_image(image);
  f.image = std::move(image);
  return f;
}

void check_frame_sequence(const FrameSequence& seq) {
  if (seq.frames.empty()) throw Error(ErrorCode::kInvalidArgument, "frame sequence is empty");
  if (!(seq.fps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "fps must be positive");
  if (seq.stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    if (!seq.frames[i].image.valid()) {
      throw Error(ErrorCode::kInvalidArgument, "frame " + std::to_string(i) + " has an invalid raster");
    }
    if (i > 0 && seq.frames[i].index <= seq.frames[i - 1].index) {
      throw Error(ErrorCode::kInvalidArgument, "frame indices must be strictly increasing");
    }
  }
}

bool WeightVector::on_simplex(double tol) const {
  return w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0 && std::abs(w1 + w2 + w3 - 1.0) <= tol;
}

double normalize_raw_score(int raw) {
  if (raw < kMinRawScore || raw > kMaxRawScore) {
    throw Error(ErrorCode::kOutOfRange, "raw score " + std::to_string(raw) + " outside [1, 10]");
  }
  return static_cast<double>(raw) / 10.0;
}

const CorrelationRow* CorrelationTable::find(std::string_view metric) const {
  for (const auto& r : rows) {
    if (r.metric == metric) return &r;
  }
  return nullptr;
}

}  // namespace sstem
