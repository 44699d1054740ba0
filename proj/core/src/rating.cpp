#include "sstem/rating.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <nlohmann/json.hpp>

#include "sstem/error.hpp"

namespace sstem::rating {

namespace fs = std::filesystem;
using nlohmann::json;

void check_axes(const AxisScores& axes) {
  for (int v : {axes.semantic, axes.spatial, axes.temporal}) {
    if (v < kMinRawScore || v > kMaxRawScore) {
      throw Error(ErrorCode::kOutOfRange, "axis score " + std::to_string(v) + " outside [1, 10]");
    }
  }
}

int overall_raw_score(const AxisScores& axes) {
  check_axes(axes);
  const int sum = axes.semantic + axes.spatial + axes.temporal;
  // sum / 3 rounded to nearest; the fractional part is 0, 1/3 or 2/3.
  return (sum + 1) / 3;
}

std::string serialize_rating(const StoredRating& r) {
  json doc = {{"video_id", r.record.video_id},   {"rater_id", r.record.rater_id},
              {"semantic", r.axes.semantic},     {"spatial", r.axes.spatial},
              {"temporal", r.axes.temporal},     {"raw_score", r.record.raw_score},
              {"normalized", r.record.normalized}, {"timestamp", r.record.timestamp}};
  return doc.dump();
}

StoredRating parse_rating(std::string_view json_line) {
  try {
    const json doc = json::parse(json_line);
    StoredRating r;
    r.record.video_id = doc.at("video_id").get<std::string>();
    r.record.rater_id = doc.at("rater_id").get<std::string>();
    r.axes = {doc.at("semantic").get<int>(), doc.at("spatial").get<int>(), doc.at("temporal").get<int>()};
    r.record.raw_score = doc.at("raw_score").get<int>();
    r.record.normalized = doc.at("normalized").get<double>();
    r.record.timestamp = doc.at("timestamp").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("rating record: ") + e.what());
  }
}

namespace {

void apply(Snapshot& snap, const StoredRating& r) {
  auto key = std::make_pair(r.record.video_id, r.record.rater_id);
  auto [it, inserted] = snap.latest.insert_or_assign(std::move(key), r);
  if (inserted) snap.raters_per_video[r.record.video_id]++;
}

}  // namespace

RatingStore::RatingStore(fs::path store_dir) {
  std::error_code ec;
  fs::create_directories(store_dir, ec);
  if (!fs::is_directory(store_dir)) {
    throw Error(ErrorCode::kIoError, "cannot create store directory " + store_dir.string());
  }
  log_path_ = store_dir / "ratings.jsonl";

  auto snap = std::make_shared<Snapshot>();
  if (fs::exists(log_path_)) {
    const auto text = read_file(log_path_);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
      const auto nl = text.find('\n', pos);
      ++line_no;
      if (nl == std::string::npos) {
        // A trailing line without newline is an interrupted append; it was
        // never acknowledged, so it is dropped.
        break;
      }
      const auto line = std::string_view(text).substr(pos, nl - pos);
      pos = nl + 1;
      if (line.empty()) continue;
      try {
        apply(*snap, parse_rating(line));
      } catch (const Error& e) {
        throw e.with_context(log_path_.string() + ":" + std::to_string(line_no));
      }
    }
    if (pos < text.size()) fs::resize_file(log_path_, pos);
  }
  snapshot_ = std::move(snap);

  log_.open(log_path_, std::ios::binary | std::ios::app);
  if (!log_) throw Error(ErrorCode::kIoError, "cannot open rating log " + log_path_.string());
}

std::shared_ptr<const Snapshot> RatingStore::snapshot() const { return std::atomic_load(&snapshot_); }

bool RatingStore::append(const StoredRating& rating) {
  std::lock_guard lock(write_mu_);
  const auto current = std::atomic_load(&snapshot_);
  auto it = current->latest.find({rating.record.video_id, rating.record.rater_id});
  if (it != current->latest.end() && it->second.axes == rating.axes) return false;

  log_ << serialize_rating(rating) << '\n';
  log_.flush();
  if (!log_) throw Error(ErrorCode::kIoError, "append to rating log failed");

  auto next = std::make_shared<Snapshot>(*current);
  apply(*next, rating);
  std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(next)));
  return true;
}

void RatingStore::flush() {
  std::lock_guard lock(write_mu_);
  log_.flush();
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RatingService::RatingService(DatasetManifest manifest, RatingStore& store, Clock clock)
    : manifest_(std::move(manifest)), store_(store), clock_(std::move(clock)) {}

std::optional<RatingTask> RatingService::next_task(const std::string& rater_id,
                                                   const std::optional<std::string>& dataset_id) const {
  if (rater_id.empty()) throw Error(ErrorCode::kInvalidArgument, "rater id must be non-empty");
  if (dataset_id && *dataset_id != manifest_.dataset_id) {
    throw Error(ErrorCode::kUnknownDataset, "dataset '" + *dataset_id + "' is not served here");
  }
  const auto snap = store_.snapshot();
  const VideoEntry* best = nullptr;
  std::int64_t best_count = 0;
  for (const auto& v : manifest_.videos) {
    if (snap->latest.contains({v.video_id, rater_id})) continue;
    auto it = snap->raters_per_video.find(v.video_id);
    const std::int64_t count = it == snap->raters_per_video.end() ? 0 : it->second;
    if (best == nullptr || count < best_count) {
      best = &v;
      best_count = count;
    }
  }
  if (best == nullptr) return std::nullopt;
  RatingTask t;
  t.task_id = manifest_.dataset_id + "/" + best->video_id;
  t.video_id = best->video_id;
  t.original_media_url = "/api/media/" + best->video_id + "/original";
  t.edited_media_url = "/api/media/" + best->video_id + "/edited";
  t.edit_prompt = best->edit_prompt;
  t.rubric = std::string(kRubric);
  return t;
}

StoredRating RatingService::submit_rating(const std::string& rater_id, const std::string& video_id,
                                          const AxisScores& axes) {
  if (rater_id.empty()) throw Error(ErrorCode::kInvalidArgument, "rater id must be non-empty");
  check_axes(axes);
  if (manifest_.find(video_id) == nullptr) {
    throw Error(ErrorCode::kUnknownVideo, "video '" + video_id + "' is not in dataset " + manifest_.dataset_id);
  }
  StoredRating r;
  r.axes = axes;
  r.record.video_id = video_id;
  r.record.rater_id = rater_id;
  r.record.raw_score = overall_raw_score(axes);
  r.record.normalized = normalize_raw_score(r.record.raw_score);
  r.record.timestamp = clock_();
  if (!store_.append(r)) {
    // Identical resubmission: the stored record stands unchanged.
    return store_.snapshot()->latest.at({video_id, rater_id});
  }
  return r;
}

std::vector<AggregateScore> RatingService::aggregates() const {
  const auto snap = store_.snapshot();
  struct Sums {
    std::int64_t raw = 0, semantic = 0, spatial = 0, temporal = 0, n = 0;
  };
  std::map<std::string, Sums> sums;
  for (const auto& [key, r] : snap->latest) {
    auto& s = sums[key.first];
    s.raw += r.record.raw_score;
    s.semantic += r.axes.semantic;
    s.spatial += r.axes.spatial;
    s.temporal += r.axes.temporal;
    s.n += 1;
  }
  std::vector<AggregateScore> out;
  for (const auto& v : manifest_.videos) {
    auto it = sums.find(v.video_id);
    if (it == sums.end()) continue;
    const auto& s = it->second;
    const double n = static_cast<double>(s.n);
    // Integer sums keep the mean exact and independent of submission order.
    out.push_back({v.video_id, static_cast<double>(s.raw) / (10.0 * n), s.n, static_cast<double>(s.semantic) / n,
                   static_cast<double>(s.spatial) / n, static_cast<double>(s.temporal) / n});
  }
  return out;
}

std::vector<HumanScore> RatingService::human_scores() const {
  std::vector<HumanScore> out;
  for (const auto& a : aggregates()) out.push_back({a.video_id, a.mean_normalized, a.n_raters});
  return out;
}

std::string RatingService::export_human_scores() const { return write_human_csv(human_scores()); }

}  // namespace sstem::rating
