#pragma once

// Human rating collection: an append-only rating log, task assignment, and
// per-video aggregation of normalized scores.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sstem/model.hpp"
#include "sstem/tabular.hpp"

namespace sstem::rating {

inline constexpr std::string_view kRubric =
    "Rate the edited video against the edit prompt on three axes, each from 1 (poor) to 10 (excellent). "
    "Semantic accuracy: does the edit do what the prompt asks? "
    "Spatial coherence: are the edited objects and their surroundings plausible within each frame? "
    "Temporal consistency: does the edit stay stable and smooth from frame to frame?";

struct AxisScores {
  int semantic = 0;
  int spatial = 0;
  int temporal = 0;

  bool operator==(const AxisScores&) const = default;
};

struct StoredRating {
  HumanScoreRecord record;  // raw_score = rounded mean of the axes
  AxisScores axes;

  bool operator==(const StoredRating&) const = default;
};

// Throws kOutOfRange unless every axis is in [1, 10].
void check_axes(const AxisScores& axes);
// Rounded mean of the three axes (never a .5 tie for three integers).
int overall_raw_score(const AxisScores& axes);

struct RatingTask {
  std::string task_id;
  std::string video_id;
  std::string original_media_url;
  std::string edited_media_url;
  std::string edit_prompt;
  std::string rubric;
};

struct AggregateScore {
  std::string video_id;
  double mean_normalized = 0.0;
  std::int64_t n_raters = 0;
  double semantic_mean = 0.0;  // per-axis means on the raw 1-10 scale
  double spatial_mean = 0.0;
  double temporal_mean = 0.0;

  bool operator==(const AggregateScore&) const = default;
};

// Immutable compacted view of the log: latest record per (video, rater).
struct Snapshot {
  std::map<std::pair<std::string, std::string>, StoredRating> latest;  // (video_id, rater_id)
  std::map<std::string, std::int64_t> raters_per_video;
};

// Log file `ratings.jsonl` in `store_dir`, one JSON record per line. A single
// writer lock serializes appends; readers take the current snapshot without
// locking.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path store_dir);

  std::shared_ptr<const Snapshot> snapshot() const;
  // Appends `rating` and publishes a new snapshot. Returns false without
  // writing when the rater's latest record for the video already has the
  // same axis scores.
  bool append(const StoredRating& rating);
  void flush();

  const std::filesystem::path& log_path() const { return log_path_; }

 private:
  std::filesystem::path log_path_;
  std::mutex write_mu_;
  std::ofstream log_;
  std::shared_ptr<const Snapshot> snapshot_;
};

std::string serialize_rating(const StoredRating& rating);
StoredRating parse_rating(std::string_view json_line);

using Clock = std::function<std::string()>;
// UTC ISO-8601 timestamp with second resolution.
std::string utc_now();

class RatingService {
 public:
  RatingService(DatasetManifest manifest, RatingStore& store, Clock clock = utc_now);

  const DatasetManifest& manifest() const { return manifest_; }

  // A video this rater has not rated yet, least-rated first (manifest order
  // breaks ties); nullopt once the rater has covered the dataset. Throws
  // kUnknownDataset when `dataset_id` is given and differs from the loaded
  // manifest, kInvalidArgument for an empty rater id.
  std::optional<RatingTask> next_task(const std::string& rater_id,
                                      const std::optional<std::string>& dataset_id = std::nullopt) const;

  // Stores (or replaces) the rater's rating of a video. Throws kOutOfRange or
  // kUnknownVideo.
  StoredRating submit_rating(const std::string& rater_id, const std::string& video_id, const AxisScores& axes);

  // One entry per rated video, manifest order.
  std::vector<AggregateScore> aggregates() const;
  std::vector<HumanScore> human_scores() const;
  // CSV: video_id,mean_normalized,n_raters
  std::string export_human_scores() const;

 private:
  DatasetManifest manifest_;
  RatingStore& store_;
  Clock clock_;
};

}  // namespace sstem::rating
