#include "sstem/ingestion.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <functional>
#include <mutex>
#include <nlohmann/json.hpp>
#include <opencv2/core/utils/logger.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>
#include <sstream>
#include <thread>

#include "sstem/error.hpp"
#include "sstem/hashing.hpp"

namespace sstem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void quiet_opencv() {
  static std::once_flag once;
  std::call_once(once, [] { cv::utils::logging::setLogLevel(cv::utils::logging::LOG_LEVEL_ERROR); });
}

RgbImage to_rgb(const cv::Mat& src) {
  cv::Mat m = src;
  if (m.depth() != CV_8U) {
    const double scale = m.depth() == CV_16U ? 1.0 / 257.0 : 1.0;
    cv::Mat tmp;
    m.convertTo(tmp, CV_8U, scale);
    m = tmp;
  }
  cv::Mat rgb;
  switch (m.channels()) {
    case 1: cv::cvtColor(m, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(m, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(m, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw Error(ErrorCode::kUnreadableVideo, "unsupported channel count " + std::to_string(m.channels()));
  }
  if (!rgb.isContinuous()) rgb = rgb.clone();
  RgbImage out;
  out.width = rgb.cols;
  out.height = rgb.rows;
  out.pixels.assign(rgb.data, rgb.data + rgb.total() * 3);
  return out;
}

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".ppm";
}

}  // namespace

FrameSequence extract_frames(const fs::path& path, std::string video_id, int stride) {
  if (stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  quiet_opencv();

  FrameSequence seq;
  seq.video_id = std::move(video_id);
  seq.stride = stride;

  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw Error(ErrorCode::kUnreadableVideo, "no such file: " + path.string());
  }

  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); i += static_cast<std::size_t>(stride)) {
      cv::Mat img = cv::imread(files[i].string(), cv::IMREAD_COLOR);
      if (img.empty()) throw Error(ErrorCode::kUnreadableVideo, "cannot decode image " + files[i].string());
      seq.frames.push_back(Frame::from_image(i, to_rgb(img)));
    }
    seq.fps = kDefaultFps;
  } else {
    cv::VideoCapture cap(path.string());
    if (!cap.isOpened()) throw Error(ErrorCode::kUnreadableVideo, "cannot open video " + path.string());
    const double fps = cap.get(cv::CAP_PROP_FPS);
    seq.fps = fps > 0.0 ? fps : kDefaultFps;
    cv::Mat frame;
    for (std::uint64_t i = 0; cap.read(frame); ++i) {
      if (frame.empty()) break;
      if (i % static_cast<std::uint64_t>(stride) != 0) continue;
      seq.frames.push_back(Frame::from_image(i, to_rgb(frame)));
    }
  }

  if (seq.frames.empty()) throw Error(ErrorCode::kEmptyVideo, "decoder yielded no frames for " + path.string());
  return seq;
}

FrameSequence extract_frames(const VideoEntry& entry, int stride, const fs::path& manifest_dir) {
  return extract_frames(resolve_media_path(manifest_dir, entry.edited_path), entry.video_id, stride);
}

std::vector<FramePromptPair> pair_with_prompt(const FrameSequence& seq, const VideoEntry& entry) {
  if (seq.video_id != entry.video_id) {
    throw Error(ErrorCode::kIdMismatch,
                "frame sequence '" + seq.video_id + "' paired with entry '" + entry.video_id + "'");
  }
  std::vector<FramePromptPair> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.push_back({&f, entry.edit_prompt});
  return out;
}

std::string CacheKey::filename() const {
  return content_hash + "-" + artifact_kind + "-" + backend_id;
}

FrameCache::FrameCache(fs::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw Error(ErrorCode::kCacheIo, "cannot create cache directory " + dir_.string() + ": " + ec.message());
  }
}

namespace {

void check_key(const CacheKey& key) {
  if (key.content_hash.empty() || key.artifact_kind.empty() || key.backend_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cache key fields must be non-empty");
  }
  for (char c : key.artifact_kind) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
      throw Error(ErrorCode::kInvalidArgument, "artifact kind must match [A-Za-z0-9_]+");
    }
  }
}

}  // namespace

std::optional<std::string> FrameCache::get(const CacheKey& key) const {
  check_key(key);
  const auto p = dir_ / key.filename();
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    std::error_code ec;
    if (fs::exists(p, ec)) throw Error(ErrorCode::kCacheIo, "cannot read cache entry " + p.string());
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kCacheIo, "read error on cache entry " + p.string());
  return buf.str();
}

void FrameCache::put(const CacheKey& key, std::string_view payload) const {
  check_key(key);
  static std::atomic<std::uint64_t> counter{0};
  const auto final_path = dir_ / key.filename();
  const auto tmp = dir_ / (".tmp-" + std::to_string(::getpid()) + "-" +
                           std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
                           std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kCacheIo, "cannot write cache entry " + tmp.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kCacheIo, "write error on cache entry " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, final_path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kCacheIo, "cannot publish cache entry " + final_path.string());
  }
}

namespace {

// Strings are stored JSON-encoded too, so a truncated entry fails to parse.
std::string serialize_text(const std::string& s) { return json(s).dump(); }
std::string parse_text(const std::string& payload) { return json::parse(payload).get<std::string>(); }

std::string serialize_embedding(const Embedding& e) { return json(e.vector).dump(); }

Embedding parse_embedding(const std::string& payload) {
  return Embedding{json::parse(payload).get<std::vector<double>>()};
}

std::string serialize_detections(const std::vector<Detection>& dets) {
  json arr = json::array();
  for (const auto& d : dets) {
    arr.push_back({{"label", d.label},
                   {"confidence", d.confidence},
                   {"box", {d.box.x0, d.box.y0, d.box.x1, d.box.y1}}});
  }
  return arr.dump();
}

std::vector<Detection> parse_detections(const std::string& payload) {
  std::vector<Detection> out;
  for (const auto& d : json::parse(payload)) {
    auto b = d.at("box").get<std::vector<double>>();
    out.push_back({d.at("label").get<std::string>(), d.at("confidence").get<double>(), {b.at(0), b.at(1), b.at(2), b.at(3)}});
  }
  return out;
}

// Looks up `key`, else computes, stores and returns. Corrupt entries are
// treated as misses and overwritten.
template <typename T, typename Compute, typename Encode, typename Decode>
T cached(const FrameCache& cache, const CacheKey& key, Compute compute, Encode encode, Decode decode) {
  if (auto hit = cache.get(key)) {
    try {
      return decode(*hit);
    } catch (const std::exception&) {
    }
  }
  T value = compute();
  cache.put(key, encode(value));
  return value;
}

class CachedCaptioner final : public Captioner {
 public:
  CachedCaptioner(Captioner& inner, std::shared_ptr<const FrameCache> cache)
      : inner_(inner), cache_(std::move(cache)), slug_(inner_.id().slug()) {}
  BackendId id() const override { return inner_.id(); }
  std::string caption(const Frame& frame) override {
    return cached<std::string>(
        *cache_, {frame.content_hash, "caption", slug_}, [&] { return inner_.caption(frame); },
        serialize_text, parse_text);
  }

 private:
  Captioner& inner_;
  std::shared_ptr<const FrameCache> cache_;
  std::string slug_;
};

class CachedTextEmbedder final : public TextEmbedder {
 public:
  CachedTextEmbedder(TextEmbedder& inner, std::shared_ptr<const FrameCache> cache)
      : inner_(inner), cache_(std::move(cache)), slug_(inner_.id().slug()) {}
  BackendId id() const override { return inner_.id(); }
  Embedding embed_text(std::string_view text) override {
    return cached<Embedding>(
        *cache_, {sha256_hex(text), "text_embedding", slug_}, [&] { return inner_.embed_text(text); },
        serialize_embedding, parse_embedding);
  }

 private:
  TextEmbedder& inner_;
  std::shared_ptr<const FrameCache> cache_;
  std::string slug_;
};

class CachedObjectExtractor final : public ObjectExtractor {
 public:
  CachedObjectExtractor(ObjectExtractor& inner, std::shared_ptr<const FrameCache> cache)
      : inner_(inner), cache_(std::move(cache)), slug_(inner_.id().slug()) {}
  BackendId id() const override { return inner_.id(); }
  std::string extract_primary_object(std::string_view prompt) override {
    return cached<std::string>(
        *cache_, {sha256_hex(prompt), "primary_object", slug_},
        [&] { return inner_.extract_primary_object(prompt); }, serialize_text,
        parse_text);
  }

 private:
  ObjectExtractor& inner_;
  std::shared_ptr<const FrameCache> cache_;
  std::string slug_;
};

class CachedDetector final : public Detector {
 public:
  CachedDetector(Detector& inner, std::shared_ptr<const FrameCache> cache)
      : inner_(inner), cache_(std::move(cache)), slug_(inner_.id().slug()) {}
  BackendId id() const override { return inner_.id(); }
  std::vector<Detection> detect(const Frame& frame, std::string_view query) override {
    // The query is part of the artifact identity.
    const std::string kind = "detections_" + sha256_hex(query).substr(0, 16);
    return cached<std::vector<Detection>>(
        *cache_, {frame.content_hash, kind, slug_}, [&] { return inner_.detect(frame, query); },
        serialize_detections, parse_detections);
  }

 private:
  Detector& inner_;
  std::shared_ptr<const FrameCache> cache_;
  std::string slug_;
};

class CachedFrameEmbedder final : public FrameEmbedder {
 public:
  CachedFrameEmbedder(FrameEmbedder& inner, std::shared_ptr<const FrameCache> cache)
      : inner_(inner), cache_(std::move(cache)), slug_(inner_.id().slug()) {}
  BackendId id() const override { return inner_.id(); }
  Embedding embed_frame(const Frame& frame) override {
    return cached<Embedding>(
        *cache_, {frame.content_hash, "frame_embedding", slug_}, [&] { return inner_.embed_frame(frame); },
        serialize_embedding, parse_embedding);
  }

 private:
  FrameEmbedder& inner_;
  std::shared_ptr<const FrameCache> cache_;
  std::string slug_;
};

}  // namespace

BackendSet wrap_with_cache(BackendSet& inner, std::shared_ptr<const FrameCache> cache) {
  BackendSet out;
  out.captioner = std::make_unique<CachedCaptioner>(*inner.captioner, cache);
  out.text_embedder = std::make_unique<CachedTextEmbedder>(*inner.text_embedder, cache);
  out.object_extractor = std::make_unique<CachedObjectExtractor>(*inner.object_extractor, cache);
  out.detector = std::make_unique<CachedDetector>(*inner.detector, cache);
  out.frame_embedder = std::make_unique<CachedFrameEmbedder>(*inner.frame_embedder, cache);
  return out;
}

}  // namespace sstem
