#pragma once

// Deterministic stand-ins for every model capability. Every output is a pure
// function of the input content and the configured seed, which makes whole
// pipeline runs bit-reproducible without model weights.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sstem/backends.hpp"

namespace sstem {

// Caption is "object-" + first 8 hex digits of the frame hash unless a
// fixture maps the hash to an explicit caption.
class MockCaptioner final : public Captioner {
 public:
  explicit MockCaptioner(std::map<std::string, std::string> fixtures = {});
  BackendId id() const override;
  std::string caption(const Frame& frame) override;

 private:
  std::map<std::string, std::string> fixtures_;
  std::string version_;
};

// Bag-of-tokens embedding: lowercase alphanumeric tokens are counted into
// `dim` buckets chosen by a seeded FNV-1a hash. Texts with disjoint
// vocabularies are orthogonal unless two tokens collide in a bucket.
// Fixtures map an exact text to a fixed vector.
class MockTextEmbedder final : public TextEmbedder {
 public:
  static constexpr std::size_t kDefaultDim = 4096;

  explicit MockTextEmbedder(std::uint64_t seed = 0, std::size_t dim = kDefaultDim,
                            std::map<std::string, std::vector<double>> fixtures = {});
  BackendId id() const override;
  Embedding embed_text(std::string_view text) override;

  std::size_t bucket(std::string_view token) const;
  static std::vector<std::string> tokens(std::string_view text);

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  std::map<std::string, std::vector<double>> fixtures_;
  std::string version_;
};

class MockObjectExtractor final : public ObjectExtractor {
 public:
  BackendId id() const override;
  std::string extract_primary_object(std::string_view edit_prompt) override;
};

// Fixture detections keyed by frame hash; an empty fixture label echoes the
// query. Unknown hashes yield no detections unless `synthesize` is set, in
// which case one detection labelled with the query gets a confidence in
// [0.5, 1) drawn from (hash, query, seed).
class MockDetector final : public Detector {
 public:
  MockDetector(std::uint64_t seed = 0, bool synthesize = false,
               std::map<std::string, std::vector<Detection>> fixtures = {});
  BackendId id() const override;
  std::vector<Detection> detect(const Frame& frame, std::string_view query) override;

 private:
  std::uint64_t seed_;
  bool synthesize_;
  std::map<std::string, std::vector<Detection>> fixtures_;
  std::string version_;
};

// Appearance embedding: mean RGB over a 4x4 grid (48 values in [0, 1]) scaled
// by seeded per-dimension weights in [0.5, 1.5], plus a constant bias term so
// the vector is never zero. Fixtures map a frame hash to a fixed vector.
class MockFrameEmbedder final : public FrameEmbedder {
 public:
  static constexpr int kGrid = 4;
  static constexpr std::size_t kDim = kGrid * kGrid * 3 + 1;

  explicit MockFrameEmbedder(std::uint64_t seed = 0,
                             std::map<std::string, std::vector<double>> fixtures = {});
  BackendId id() const override;
  Embedding embed_frame(const Frame& frame) override;

 private:
  std::uint64_t seed_;
  std::vector<double> weights_;
  std::map<std::string, std::vector<double>> fixtures_;
  std::string version_;
};

}  // namespace sstem
