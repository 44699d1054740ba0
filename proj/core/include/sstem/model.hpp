#pragma once

// Domain types shared across the evaluation pipeline. These are plain value
// objects; validation lives in free functions so that partially-built values
// can still be inspected and reported on.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sstem {

enum class SplitRole { kOptimization, kValidation };

std::string_view to_string(SplitRole role);
std::optional<SplitRole> parse_split_role(std::string_view text);

struct VideoEntry {
  std::string video_id;
  std::string original_path;
  std::string edited_path;
  std::string edit_prompt;
  std::string model_name;

  bool operator==(const VideoEntry&) const = default;
};

struct DatasetManifest {
  std::string dataset_id;
  std::vector<VideoEntry> videos;
  std::map<std::string, SplitRole> split;

  const VideoEntry* find(std::string_view video_id) const;

  bool operator==(const DatasetManifest&) const = default;
};

struct ManifestViolation {
  std::string field;
  std::string video_id;  // empty for dataset-level violations
  std::string message;
};

// Empty result iff the manifest is well formed.
std::vector<ManifestViolation> validate_manifest(const DatasetManifest& manifest);

DatasetManifest parse_manifest(std::string_view json_text);
DatasetManifest load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const DatasetManifest& manifest);

// Relative media paths in a manifest are resolved against the manifest's
// directory.
std::filesystem::path resolve_media_path(const std::filesystem::path& manifest_dir,
                                         const std::string& path);

// 8-bit interleaved RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  }
  bool operator==(const RgbImage&) const = default;
};

// Hex SHA-256 over dimensions and pixel bytes.
std::string hash_image(const RgbImage& image);

struct Frame {
  std::uint64_t index = 0;
  RgbImage image;
  std::string content_hash;

  static Frame from_image(std::uint64_t index, RgbImage image);
};

struct FrameSequence {
  std::string video_id;
  std::vector<Frame> frames;
  double fps = 0.0;
  int stride = 1;

  std::size_t size() const { return frames.size(); }
};

// Throws kInvalidArgument when indices are not strictly increasing, the
// sequence is empty, or a frame is malformed.
void check_frame_sequence(const FrameSequence& seq);

struct StageScores {
  std::string video_id;
  double s_similarity = 0.0;
  double s_object = 0.0;
  double s_temporal = 0.0;
  std::int64_t n_frames = 0;

  bool operator==(const StageScores&) const = default;
};

enum class TemporalForm { kDirect, kPenalty };

std::string_view to_string(TemporalForm form);
std::optional<TemporalForm> parse_temporal_form(std::string_view text);

struct WeightVector {
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double intercept = 0.0;
  TemporalForm temporal_form = TemporalForm::kDirect;

  bool on_simplex(double tol = 1e-9) const;
  bool operator==(const WeightVector&) const = default;
};

inline constexpr int kMinRawScore = 1;
inline constexpr int kMaxRawScore = 10;

struct HumanScoreRecord {
  std::string video_id;
  std::string rater_id;
  int raw_score = 0;
  double normalized = 0.0;
  std::string timestamp;

  bool operator==(const HumanScoreRecord&) const = default;
};

// raw / 10; throws kOutOfRange outside [1, 10].
double normalize_raw_score(int raw);

struct CorrelationRow {
  std::string metric;
  double pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;

  bool operator==(const CorrelationRow&) const = default;
};

struct CorrelationTable {
  std::vector<CorrelationRow> rows;

  const CorrelationRow* find(std::string_view metric) const;
  bool operator==(const CorrelationTable&) const = default;
};

}  // namespace sstem
