#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sstem/backends.hpp"
#include "sstem/model.hpp"

namespace sstem {

// Frame rate assumed for image-directory inputs and containers that do not
// report one.
inline constexpr double kDefaultFps = 25.0;

// Decodes `path` and keeps every `stride`-th frame (indices 0, stride, ...),
// converted to 8-bit RGB. `path` may be a video container or a directory of
// still images (png/jpg/jpeg/bmp/ppm, taken in lexicographic filename order).
// Throws kUnreadableVideo if the path is missing or cannot be decoded, and
// kEmptyVideo if decoding yields no frames.
FrameSequence extract_frames(const std::filesystem::path& path, std::string video_id, int stride = 1);

// Reads entry.edited_path, resolved against `manifest_dir` when relative.
FrameSequence extract_frames(const VideoEntry& entry, int stride = 1,
                             const std::filesystem::path& manifest_dir = {});

struct FramePromptPair {
  const Frame* frame = nullptr;
  std::string prompt;
};

// One pair per frame; throws kIdMismatch if the ids differ. Pairs point into
// `seq`, which must outlive them.
std::vector<FramePromptPair> pair_with_prompt(const FrameSequence& seq, const VideoEntry& entry);

struct CacheKey {
  std::string content_hash;   // hex digest of the input content
  std::string artifact_kind;  // e.g. "caption", "frame_embedding"
  std::string backend_id;     // BackendId::slug()

  // hex(content_hash)-artifactkind-backendid
  std::string filename() const;
};

// One file per entry in a flat directory. Writes go through a temporary file
// and a rename, so concurrent writers of the same key are last-write-wins and
// readers never observe a partial payload.
class FrameCache {
 public:
  // Creates the directory if needed; throws kCacheIo on failure.
  explicit FrameCache(std::filesystem::path directory);

  std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, std::string_view payload) const;

  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

// Wraps every backend so results are looked up in / stored to `cache`. Cached
// payloads are serialized losslessly, so hits are bit-identical to
// recomputation under the same backend id. The returned set borrows `inner`,
// which must outlive it.
BackendSet wrap_with_cache(BackendSet& inner, std::shared_ptr<const FrameCache> cache);

}  // namespace sstem
