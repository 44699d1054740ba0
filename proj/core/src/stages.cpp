#include "sstem/stages.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <vector>

#include "sstem/error.hpp"
#include "sstem/numeric.hpp"

namespace sstem {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string frame_tag(const Frame& f) { return "frame " + std::to_string(f.index); }

Embedding checked(Embedding e, const char* what) {
  if (!e.valid()) throw Error(ErrorCode::kInferenceFailed, std::string(what) + " produced an invalid embedding");
  return e;
}

}  // namespace

double semantic_score(const FrameSequence& seq, std::string_view prompt, Captioner& captioner,
                      TextEmbedder& text_embedder) {
  if (seq.frames.empty()) throw Error(ErrorCode::kInvalidArgument, "semantic score needs at least one frame");
  if (prompt.empty()) throw Error(ErrorCode::kInvalidArgument, "prompt must be non-empty");

  const auto prompt_vec = checked(text_embedder.embed_text(prompt), "text embedder");
  std::vector<double> per_frame;
  per_frame.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) {
    try {
      const auto caption = captioner.caption(frame);
      const auto caption_vec = checked(text_embedder.embed_text(caption), "text embedder");
      per_frame.push_back(clamp_unit(cosine_similarity(caption_vec.vector, prompt_vec.vector)));
    } catch (const Error& e) {
      throw e.with_context(frame_tag(frame));
    }
  }
  return accurate_mean(per_frame);
}

bool label_matches(std::string_view label, std::string_view query) {
  const auto l = lower(label);
  const auto q = lower(query);
  if (l.empty() || q.empty()) return false;
  return l.find(q) != std::string::npos || q.find(l) != std::string::npos;
}

std::string resolve_primary_object(std::string_view prompt, ObjectExtractor& extractor) {
  try {
    return extractor.extract_primary_object(prompt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kExtractionEmpty) throw;
  }
  try {
    return heuristic_primary_object(prompt);
  } catch (const Error& e) {
    throw Error(ErrorCode::kObjectQueryFailed, std::string("no primary object for prompt: ") + e.what());
  }
}

double object_score_for_query(const FrameSequence& seq, std::string_view query, Detector& detector) {
  if (seq.frames.empty()) throw Error(ErrorCode::kInvalidArgument, "object score needs at least one frame");
  std::vector<double> per_frame;
  per_frame.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) {
    try {
      double best = 0.0;
      for (const auto& d : detector.detect(frame, query)) {
        if (label_matches(d.label, query)) best = std::max(best, d.confidence);
      }
      per_frame.push_back(clamp_unit(best));
    } catch (const Error& e) {
      throw e.with_context(frame_tag(frame));
    }
  }
  return accurate_mean(per_frame);
}

double object_score(const FrameSequence& seq, std::string_view prompt, ObjectExtractor& extractor,
                    Detector& detector) {
  if (seq.frames.empty()) throw Error(ErrorCode::kInvalidArgument, "object score needs at least one frame");
  const auto query = resolve_primary_object(prompt, extractor);
  return object_score_for_query(seq, query, detector);
}

double temporal_score(const FrameSequence& seq, FrameEmbedder& frame_embedder) {
  if (seq.frames.size() < 2) {
    throw Error(ErrorCode::kTooFewFrames,
                "temporal score needs at least 2 frames, got " + std::to_string(seq.frames.size()));
  }
  std::vector<double> pairs;
  pairs.reserve(seq.frames.size() - 1);
  Embedding prev;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    Embedding cur;
    try {
      cur = checked(frame_embedder.embed_frame(seq.frames[i]), "frame embedder");
    } catch (const Error& e) {
      throw e.with_context(frame_tag(seq.frames[i]));
    }
    if (i > 0) pairs.push_back(clamp_unit(cosine_similarity(prev.vector, cur.vector)));
    prev = std::move(cur);
  }
  return accurate_mean(pairs);
}

StageScores score_frames(const FrameSequence& seq, std::string_view prompt, BackendSet& backends) {
  StageScores out;
  out.video_id = seq.video_id;
  out.n_frames = static_cast<std::int64_t>(seq.frames.size());

  std::optional<ErrorCode> first;
  std::string failures;
  auto run = [&](const char* stage, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (!first) first = e.code();
      if (!failures.empty()) failures += "; ";
      failures += std::string("[") + stage + "] " + e.what();
    }
  };
  run("semantic", [&] { out.s_similarity = semantic_score(seq, prompt, *backends.captioner, *backends.text_embedder); });
  run("object", [&] { out.s_object = object_score(seq, prompt, *backends.object_extractor, *backends.detector); });
  run("temporal", [&] { out.s_temporal = temporal_score(seq, *backends.frame_embedder); });
  if (first) throw Error(*first, seq.video_id + ": " + failures);
  return out;
}

StageScores score_video(const VideoEntry& entry, const ScoringConfig& config, BackendSet& backends) {
  if (entry.edit_prompt.empty()) throw Error(ErrorCode::kInvalidArgument, entry.video_id + ": empty edit prompt");
  FrameSequence seq;
  try {
    seq = extract_frames(entry, config.stride, config.manifest_dir);
  } catch (const Error& e) {
    throw e.with_context(entry.video_id + ": [ingest]");
  }
  if (!config.cache) return score_frames(seq, entry.edit_prompt, backends);

  auto cached = wrap_with_cache(backends, config.cache);
  return score_frames(seq, entry.edit_prompt, cached);
}

}  // namespace sstem
