#pragma once

// The three per-video stage scores and their composition.
//
// All per-frame cosines are clamped to [0, 1] before averaging, so every
// stage score lies in [0, 1].

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "sstem/backends.hpp"
#include "sstem/ingestion.hpp"
#include "sstem/model.hpp"

namespace sstem {

// Mean over frames of clamp(cos(embed(caption(frame)), embed(prompt))).
double semantic_score(const FrameSequence& seq, std::string_view prompt, Captioner& captioner,
                      TextEmbedder& text_embedder);

// True when one of label / query contains the other, ignoring case.
bool label_matches(std::string_view label, std::string_view query);

// Resolves the primary object once per video. Falls back to the rule-based
// heuristic on kExtractionEmpty; throws kObjectQueryFailed if that also fails.
std::string resolve_primary_object(std::string_view prompt, ObjectExtractor& extractor);

// Mean over frames of the best matching detection confidence (0 if none).
double object_score(const FrameSequence& seq, std::string_view prompt, ObjectExtractor& extractor,
                    Detector& detector);

// Object score for an already resolved query.
double object_score_for_query(const FrameSequence& seq, std::string_view query, Detector& detector);

// Mean over the N-1 consecutive pairs of clamp(cos(F_i, F_{i+1})).
// Throws kTooFewFrames when N < 2.
double temporal_score(const FrameSequence& seq, FrameEmbedder& frame_embedder);

// Scores an already decoded sequence. Stage failures are collected and
// rethrown as one Error (code of the first failing stage) whose message tags
// every failing stage.
StageScores score_frames(const FrameSequence& seq, std::string_view prompt, BackendSet& backends);

struct ScoringConfig {
  int stride = 1;
  std::filesystem::path manifest_dir;          // base for relative media paths
  std::shared_ptr<const FrameCache> cache;     // null disables caching
};

// Decodes entry.edited_path and scores it. When `config.cache` is set the
// backends are wrapped for this call only.
StageScores score_video(const VideoEntry& entry, const ScoringConfig& config, BackendSet& backends);

}  // namespace sstem
