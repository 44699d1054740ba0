#pragma once

// Weighted aggregation of stage scores and least-squares weight fitting.
//
//   S_final = w1*s_similarity + w2*s_object + w3*T + intercept
//   T       = s_temporal       (direct form)
//           = 1 - s_temporal   (penalty form)
//
// Fitting minimizes L = (1/M) * sum_j (S_final_j - S_human_j)^2.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sstem/model.hpp"

namespace sstem {

enum class FitMethod { kOls, kOlsIntercept, kSimplex };

std::string_view to_string(FitMethod method);
// Accepts "ols", "ols_intercept"/"ols-intercept", "simplex".
std::optional<FitMethod> parse_fit_method(std::string_view text);

struct FitRow {
  StageScores scores;
  double human = 0.0;
};

struct FitResult {
  WeightVector weights;
  double loss = 0.0;
  FitMethod method = FitMethod::kOls;
  std::int64_t n_samples = 0;

  bool operator==(const FitResult&) const = default;
};

double aggregate(const StageScores& scores, const WeightVector& weights);

// Mean squared difference between aggregate() and the human targets.
double evaluate_loss(const std::vector<FitRow>& rows, const WeightVector& weights);

// kOls needs M >= 3 and kOlsIntercept M >= 4 (kTooFewSamples otherwise);
// kSimplex needs M >= 1. Throws kRankDeficient when the design matrix cannot
// determine the unknowns.
//
// kSimplex returns the exact minimizer over {w >= 0, w1+w2+w3 = 1}: every face
// of the simplex is solved as an equality-constrained least-squares problem
// and the best feasible one wins.
FitResult fit_weights(const std::vector<FitRow>& rows, FitMethod method,
                      TemporalForm temporal_form = TemporalForm::kDirect);

struct SplitRows {
  std::vector<FitRow> optimization;
  std::vector<FitRow> validation;
};

// Partitions rows by the manifest split. Throws kUnsplitVideo for a row whose
// video is not assigned, and kInvalidManifest if the split is entirely empty.
SplitRows split_rows(const DatasetManifest& manifest, const std::vector<FitRow>& rows);

std::string serialize_fit_result(const FitResult& fit);
FitResult parse_fit_result(std::string_view json_text);

}  // namespace sstem
