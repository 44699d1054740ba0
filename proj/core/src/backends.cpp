#include "sstem/backends.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <span>
#include <sstream>

#include "sstem/error.hpp"

namespace sstem {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kCaptioner: return "captioner";
    case BackendKind::kTextEmbedder: return "text_embedder";
    case BackendKind::kObjectExtractor: return "object_extractor";
    case BackendKind::kDetector: return "detector";
    case BackendKind::kFrameEmbedder: return "frame_embedder";
  }
  return "unknown";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  for (auto k : {BackendKind::kCaptioner, BackendKind::kTextEmbedder, BackendKind::kObjectExtractor,
                 BackendKind::kDetector, BackendKind::kFrameEmbedder}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string BackendId::slug() const {
  std::string s = std::string(to_string(kind)) + "." + name + "." + version;
  for (char& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
    if (!ok) c = '_';
  }
  return s;
}

bool Detection::valid() const {
  return std::isfinite(confidence) && confidence >= 0.0 && confidence <= 1.0 && box.x0 < box.x1 &&
         box.y0 < box.y1 && box.x0 >= 0.0 && box.y0 >= 0.0 && box.x1 <= 1.0 && box.y1 <= 1.0;
}

bool Embedding::valid() const {
  return !vector.empty() &&
         std::all_of(vector.begin(), vector.end(), [](double v) { return std::isfinite(v); });
}

std::string render_object_extraction_prompt(std::string_view edit_prompt) {
  std::string out(kObjectExtractionTemplate);
  const auto pos = out.find("{prompt}");
  out.replace(pos, 8, edit_prompt);
  return out;
}

namespace {

std::vector<std::string> tokenize_words(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '\'') {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else {
      cleaned.push_back(' ');
    }
  }
  std::vector<std::string> words;
  std::istringstream in(cleaned);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

bool contains(std::span<const std::string_view> set, std::string_view w) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

}  // namespace

std::string heuristic_primary_object(std::string_view edit_prompt) {
  if (edit_prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "edit prompt must be non-empty");

  static constexpr std::array<std::string_view, 4> kMarkers = {"into", "with", "as", "like"};
  static constexpr std::array<std::string_view, 14> kEditVerbs = {
      "turn", "make", "change", "replace", "convert", "transform", "add", "edit",
      "swap", "render", "show", "put", "let", "it"};
  static constexpr std::array<std::string_view, 12> kQualifiers = {
      "in", "on", "at", "under", "near", "over", "while", "during", "behind", "beside", "from", "and"};
  static constexpr std::array<std::string_view, 9> kDeterminers = {
      "a", "an", "the", "some", "this", "that", "these", "those", "its"};

  auto words = tokenize_words(edit_prompt);

  std::size_t begin = 0;
  bool found_marker = false;
  for (std::size_t i = words.size(); i-- > 0;) {
    if (contains(kMarkers, words[i])) {
      begin = i + 1;
      found_marker = true;
      break;
    }
  }
  if (!found_marker) {
    while (begin < words.size() && contains(kEditVerbs, words[begin])) ++begin;
  }

  std::size_t end = words.size();
  for (std::size_t i = begin; i < words.size(); ++i) {
    // A qualifier in first position is part of the phrase, not a cut point.
    if (i > begin && contains(kQualifiers, words[i])) {
      end = i;
      break;
    }
  }
  while (begin < end && contains(kDeterminers, words[begin])) ++begin;

  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  if (out.empty()) {
    throw Error(ErrorCode::kExtractionEmpty,
                "no object phrase found in prompt '" + std::string(edit_prompt) + "'");
  }
  return out;
}

}  // namespace sstem
