#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sstem/aggregation.hpp"
#include "sstem/model.hpp"
#include "sstem/tabular.hpp"

namespace sstem {

struct ModelSummary {
  std::string model_name;
  std::int64_t n_videos = 0;
  double s_similarity = 0.0;
  double s_object = 0.0;
  double s_temporal = 0.0;
  double s_final = 0.0;

  bool operator==(const ModelSummary&) const = default;
};

// Provenance echoed into every report.
struct ReportConfig {
  int stride = 1;
  std::string backends;  // JSON description of the backend configuration
  std::optional<std::uint64_t> seed;
  std::string fit_method;

  bool operator==(const ReportConfig&) const = default;
};

struct EvaluationReport {
  std::string dataset_id;
  std::vector<ModelSummary> models;  // sorted by model name
  WeightVector weights;
  // Present when at least two scored videos have human scores and every
  // coefficient is defined; otherwise `correlation_note` says why not.
  std::optional<CorrelationTable> correlation;
  std::optional<double> r_squared;  // s_final vs human
  std::int64_t n_correlated = 0;
  std::string correlation_note;
  ReportConfig config;
  std::string generated_at;

  bool operator==(const EvaluationReport&) const = default;
};

// Throws kInvalidArgument on empty `scores`. Correlation problems never throw;
// they are recorded in `correlation_note`.
EvaluationReport build_report(std::string dataset_id, const std::vector<ScoreRow>& scores,
                              const WeightVector& weights, const std::vector<HumanScore>& human,
                              ReportConfig config, std::string generated_at);

enum class ReportFormat { kTabular, kStructured, kMarkdown };

// "tabular"/"csv", "structured"/"json", "markdown"/"md"; kUnknownFormat
// otherwise.
ReportFormat parse_report_format(std::string_view text);

// Pure and byte-deterministic. Tabular and markdown print stage scores with 6
// decimals and correlations with 3; the structured (JSON) form keeps full
// precision so it parses back to an equal report.
std::string render(const EvaluationReport& report, ReportFormat format);

EvaluationReport parse_structured_report(std::string_view json_text);

}  // namespace sstem
