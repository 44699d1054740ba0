#pragma once

// Model capability contracts. Each capability is a small abstract interface;
// concrete providers are the deterministic mocks (mock_backends.hpp) and the
// HTTP inference client (endpoint_client.hpp).
//
// A backend instance is confined to one worker thread. Mocks happen to be
// stateless, but callers must not rely on that.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sstem/model.hpp"

namespace sstem {

enum class BackendKind { kCaptioner, kTextEmbedder, kObjectExtractor, kDetector, kFrameEmbedder };

std::string_view to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

// (kind, name, version) identifies a backend's behavior for caching.
struct BackendId {
  BackendKind kind = BackendKind::kCaptioner;
  std::string name;
  std::string version;

  // "kind.name.version" with anything outside [A-Za-z0-9._] replaced by '_'.
  // Safe to embed in a file name.
  std::string slug() const;
  bool operator==(const BackendId&) const = default;
};

struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  bool operator==(const Box&) const = default;
};

struct Detection {
  std::string label;
  double confidence = 0.0;
  Box box;

  bool valid() const;
  bool operator==(const Detection&) const = default;
};

struct Embedding {
  std::vector<double> vector;

  std::size_t dim() const { return vector.size(); }
  bool valid() const;  // dim > 0, finite entries
  bool operator==(const Embedding&) const = default;
};

class Captioner {
 public:
  virtual ~Captioner() = default;
  virtual BackendId id() const = 0;
  virtual std::string caption(const Frame& frame) = 0;
};

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual BackendId id() const = 0;
  virtual Embedding embed_text(std::string_view text) = 0;
};

class ObjectExtractor {
 public:
  virtual ~ObjectExtractor() = default;
  virtual BackendId id() const = 0;
  // Lowercased, stripped noun phrase. Throws kExtractionEmpty when nothing
  // usable comes back.
  virtual std::string extract_primary_object(std::string_view edit_prompt) = 0;
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual BackendId id() const = 0;
  // Empty result means the object is absent from the frame.
  virtual std::vector<Detection> detect(const Frame& frame, std::string_view query) = 0;
};

class FrameEmbedder {
 public:
  virtual ~FrameEmbedder() = default;
  virtual BackendId id() const = 0;
  virtual Embedding embed_frame(const Frame& frame) = 0;
};

// One instance of every capability, owned by a single worker.
struct BackendSet {
  std::unique_ptr<Captioner> captioner;
  std::unique_ptr<TextEmbedder> text_embedder;
  std::unique_ptr<ObjectExtractor> object_extractor;
  std::unique_ptr<Detector> detector;
  std::unique_ptr<FrameEmbedder> frame_embedder;
};

// Instruction sent to an LLM-backed object extractor. `{prompt}` is replaced
// with the edit prompt.
inline constexpr std::string_view kObjectExtractionTemplate =
    "Identify the single primary object being edited in this instruction; "
    "answer with a noun phrase only: {prompt}";

std::string render_object_extraction_prompt(std::string_view edit_prompt);

// Rule-based primary-object extraction, also the fallback when a model
// extractor returns nothing usable:
//   1. lowercase, replace punctuation other than '-' and '\'' with spaces;
//   2. if one of " into ", " with ", " as ", " like " occurs, keep the text
//      after its last occurrence; otherwise drop leading edit verbs;
//   3. cut at the first trailing qualifier (" in ", " on ", " at ", ...);
//   4. drop leading determiners ("a", "an", "the", ...).
// Throws kExtractionEmpty when nothing is left.
std::string heuristic_primary_object(std::string_view edit_prompt);

}  // namespace sstem
