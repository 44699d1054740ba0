#include "sstem/mock_backends.hpp"

#include <cctype>
#include <nlohmann/json.hpp>
#include <random>

#include "sstem/error.hpp"
#include "sstem/hashing.hpp"

namespace sstem {

using nlohmann::json;

namespace {

constexpr std::string_view kMockName = "mock";

// Version string folds in the seed and a digest of the fixtures, so cached
// artifacts never leak between differently configured mocks.
std::string mock_version(std::uint64_t seed, const json& fixtures) {
  std::string v = "1-s" + std::to_string(seed);
  if (!fixtures.empty()) v += "-f" + sha256_hex(fixtures.dump()).substr(0, 12);
  return v;
}

double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

MockCaptioner::MockCaptioner(std::map<std::string, std::string> fixtures)
    : fixtures_(std::move(fixtures)), version_(mock_version(0, json(fixtures_))) {}

BackendId MockCaptioner::id() const {
  return {BackendKind::kCaptioner, std::string(kMockName), version_};
}

std::string MockCaptioner::caption(const Frame& frame) {
  if (auto it = fixtures_.find(frame.content_hash); it != fixtures_.end()) return it->second;
  return "object-" + frame.content_hash.substr(0, 8);
}

MockTextEmbedder::MockTextEmbedder(std::uint64_t seed, std::size_t dim,
                                   std::map<std::string, std::vector<double>> fixtures)
    : seed_(seed), dim_(dim), fixtures_(std::move(fixtures)) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "text embedding dim must be positive");
  version_ = mock_version(seed_, json(fixtures_)) + "-d" + std::to_string(dim_);
}

BackendId MockTextEmbedder::id() const {
  return {BackendKind::kTextEmbedder, std::string(kMockName), version_};
}

std::vector<std::string> MockTextEmbedder::tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t MockTextEmbedder::bucket(std::string_view token) const {
  return static_cast<std::size_t>(fnv1a64(token, seed_) % dim_);
}

Embedding MockTextEmbedder::embed_text(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kInvalidArgument, "text must be non-empty");
  if (auto it = fixtures_.find(std::string(text)); it != fixtures_.end()) return {it->second};
  Embedding e;
  e.vector.assign(dim_, 0.0);
  for (const auto& tok : tokens(text)) e.vector[bucket(tok)] += 1.0;
  return e;
}

BackendId MockObjectExtractor::id() const {
  return {BackendKind::kObjectExtractor, std::string(kMockName), "1"};
}

std::string MockObjectExtractor::extract_primary_object(std::string_view edit_prompt) {
  return heuristic_primary_object(edit_prompt);
}

MockDetector::MockDetector(std::uint64_t seed, bool synthesize,
                           std::map<std::string, std::vector<Detection>> fixtures)
    : seed_(seed), synthesize_(synthesize), fixtures_(std::move(fixtures)) {
  json fx = json::object();
  for (const auto& [hash, dets] : fixtures_) {
    for (const auto& d : dets) {
      fx[hash].push_back({d.label, d.confidence, d.box.x0, d.box.y0, d.box.x1, d.box.y1});
    }
  }
  version_ = mock_version(seed_, fx) + (synthesize_ ? "-syn" : "");
}

BackendId MockDetector::id() const {
  return {BackendKind::kDetector, std::string(kMockName), version_};
}

std::vector<Detection> MockDetector::detect(const Frame& frame, std::string_view query) {
  if (query.empty()) throw Error(ErrorCode::kInvalidArgument, "detection query must be non-empty");
  if (auto it = fixtures_.find(frame.content_hash); it != fixtures_.end()) {
    auto out = it->second;
    for (auto& d : out) {
      if (d.label.empty()) d.label = std::string(query);
    }
    return out;
  }
  if (!synthesize_) return {};
  std::mt19937_64 rng(fnv1a64(frame.content_hash + "\n" + std::string(query), seed_));
  const double confidence = 0.5 + 0.5 * unit_from_bits(rng());
  return {Detection{std::string(query), confidence, Box{0.25, 0.25, 0.75, 0.75}}};
}

MockFrameEmbedder::MockFrameEmbedder(std::uint64_t seed,
                                     std::map<std::string, std::vector<double>> fixtures)
    : seed_(seed), fixtures_(std::move(fixtures)) {
  std::mt19937_64 rng(seed_);
  weights_.resize(kDim - 1);
  for (auto& w : weights_) w = 0.5 + unit_from_bits(rng());
  version_ = mock_version(seed_, json(fixtures_));
}

BackendId MockFrameEmbedder::id() const {
  return {BackendKind::kFrameEmbedder, std::string(kMockName), version_};
}

Embedding MockFrameEmbedder::embed_frame(const Frame& frame) {
  if (auto it = fixtures_.find(frame.content_hash); it != fixtures_.end()) return {it->second};
  const auto& img = frame.image;
  if (!img.valid()) throw Error(ErrorCode::kInvalidArgument, "frame raster is invalid");

  std::vector<double> sums(kDim - 1, 0.0);
  std::vector<double> counts(kGrid * kGrid, 0.0);
  for (int y = 0; y < img.height; ++y) {
    const int gy = y * kGrid / img.height;
    for (int x = 0; x < img.width; ++x) {
      const int gx = x * kGrid / img.width;
      const int cell = gy * kGrid + gx;
      const std::size_t px = (static_cast<std::size_t>(y) * img.width + x) * 3;
      for (int c = 0; c < 3; ++c) sums[cell * 3 + c] += img.pixels[px + c];
      counts[cell] += 1.0;
    }
  }
  Embedding e;
  e.vector.resize(kDim);
  for (std::size_t i = 0; i + 1 < kDim; ++i) {
    const double n = counts[i / 3];
    const double mean = n > 0.0 ? sums[i] / (n * 255.0) : 0.0;
    e.vector[i] = weights_[i] * mean;
  }
  e.vector[kDim - 1] = 1.0;
  return e;
}

}  // namespace sstem
