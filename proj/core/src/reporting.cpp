#include "sstem/reporting.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>

#include "sstem/error.hpp"
#include "sstem/numeric.hpp"
#include "sstem/stats.hpp"

namespace sstem {

using nlohmann::json;

EvaluationReport build_report(std::string dataset_id, const std::vector<ScoreRow>& scores,
                              const WeightVector& weights, const std::vector<HumanScore>& human,
                              ReportConfig config, std::string generated_at) {
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "report needs at least one scored video");

  EvaluationReport report;
  report.dataset_id = std::move(dataset_id);
  report.weights = weights;
  report.config = std::move(config);
  report.generated_at = std::move(generated_at);

  struct Columns {
    std::vector<double> sim, obj, tmp, fin;
  };
  std::map<std::string, Columns> by_model;
  for (const auto& r : scores) {
    auto& c = by_model[r.model_name];
    c.sim.push_back(r.scores.s_similarity);
    c.obj.push_back(r.scores.s_object);
    c.tmp.push_back(r.scores.s_temporal);
    c.fin.push_back(aggregate(r.scores, weights));
  }
  for (const auto& [name, c] : by_model) {
    report.models.push_back({name, static_cast<std::int64_t>(c.sim.size()), accurate_mean(c.sim),
                             accurate_mean(c.obj), accurate_mean(c.tmp), accurate_mean(c.fin)});
  }

  if (human.empty()) {
    report.correlation_note = "no human scores supplied";
    return report;
  }

  std::map<std::string, double> human_by_id;
  for (const auto& h : human) human_by_id[h.video_id] = h.mean_normalized;

  stats::LabeledValues target;
  std::vector<stats::NamedMetric> metrics = {{"s_similarity", {}}, {"s_object", {}}, {"s_temporal", {}},
                                             {"s_final", {}}};
  for (const auto& r : scores) {
    auto it = human_by_id.find(r.scores.video_id);
    if (it == human_by_id.end()) continue;
    target.labels.push_back(r.scores.video_id);
    target.values.push_back(it->second);
    const double vals[] = {r.scores.s_similarity, r.scores.s_object, r.scores.s_temporal,
                           aggregate(r.scores, weights)};
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      metrics[m].values.labels.push_back(r.scores.video_id);
      metrics[m].values.values.push_back(vals[m]);
    }
  }
  report.n_correlated = static_cast<std::int64_t>(target.labels.size());
  if (target.labels.size() < 2) {
    report.correlation_note = "fewer than 2 scored videos have human scores";
    return report;
  }
  try {
    report.correlation = stats::correlation_table(target, metrics);
    report.r_squared = stats::r_squared(metrics.back().values.values, target.values);
  } catch (const Error& e) {
    report.correlation.reset();
    report.r_squared.reset();
    report.correlation_note = std::string("correlation unavailable: ") + e.what();
  }
  return report;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "tabular" || text == "csv") return ReportFormat::kTabular;
  if (text == "structured" || text == "json") return ReportFormat::kStructured;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  throw Error(ErrorCode::kUnknownFormat, "unknown report format '" + std::string(text) + "'");
}

namespace {

json to_json(const EvaluationReport& r) {
  json doc;
  doc["dataset_id"] = r.dataset_id;
  doc["generated_at"] = r.generated_at;
  doc["models"] = json::array();
  for (const auto& m : r.models) {
    doc["models"].push_back({{"model_name", m.model_name},
                             {"n_videos", m.n_videos},
                             {"s_similarity", m.s_similarity},
                             {"s_object", m.s_object},
                             {"s_temporal", m.s_temporal},
                             {"s_final", m.s_final}});
  }
  doc["weights"] = {{"w1", r.weights.w1},
                    {"w2", r.weights.w2},
                    {"w3", r.weights.w3},
                    {"intercept", r.weights.intercept},
                    {"temporal_form", to_string(r.weights.temporal_form)}};
  if (r.correlation) {
    json rows = json::array();
    for (const auto& row : r.correlation->rows) {
      rows.push_back(
          {{"metric", row.metric}, {"pearson", row.pearson}, {"spearman", row.spearman}, {"kendall", row.kendall}});
    }
    doc["correlation"] = rows;
  } else {
    doc["correlation"] = nullptr;
  }
  doc["r_squared"] = r.r_squared ? json(*r.r_squared) : json(nullptr);
  doc["n_correlated"] = r.n_correlated;
  doc["correlation_note"] = r.correlation_note;
  json cfg = {{"stride", r.config.stride},
              {"backends", r.config.backends},
              {"fit_method", r.config.fit_method},
              {"temporal_form", to_string(r.weights.temporal_form)}};
  cfg["seed"] = r.config.seed ? json(*r.config.seed) : json(nullptr);
  doc["config"] = cfg;
  return doc;
}

std::string render_tabular(const EvaluationReport& r) {
  CsvTable t;
  t.header = {"model_name", "n_videos", "s_similarity", "s_object", "s_temporal", "s_final"};
  for (const auto& m : r.models) {
    t.rows.push_back({m.model_name, std::to_string(m.n_videos), format_fixed(m.s_similarity, 6),
                      format_fixed(m.s_object, 6), format_fixed(m.s_temporal, 6), format_fixed(m.s_final, 6)});
  }
  return write_csv(t);
}

std::string escape_md(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else out.push_back(c);
  }
  return out;
}

std::string render_markdown(const EvaluationReport& r) {
  std::string out;
  out += "# Evaluation report: " + escape_md(r.dataset_id) + "\n\n";
  out += "Generated at: " + r.generated_at + "\n\n";

  out += "## Per-model scores\n\n";
  out += "| Model | Videos | Semantic similarity | Object detection | Temporal consistency | Final score |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& m : r.models) {
    out += "| " + escape_md(m.model_name) + " | " + std::to_string(m.n_videos) + " | " +
           format_fixed(m.s_similarity, 6) + " | " + format_fixed(m.s_object, 6) + " | " +
           format_fixed(m.s_temporal, 6) + " | " + format_fixed(m.s_final, 6) + " |\n";
  }

  const auto& w = r.weights;
  out += "\n## Weights\n\n";
  out += "| w1 (semantic) | w2 (object) | w3 (temporal) | intercept | temporal form |\n";
  out += "|---:|---:|---:|---:|---|\n";
  out += "| " + format_fixed(w.w1, 6) + " | " + format_fixed(w.w2, 6) + " | " + format_fixed(w.w3, 6) + " | " +
         format_fixed(w.intercept, 6) + " | " + std::string(to_string(w.temporal_form)) + " |\n";

  out += "\n## Correlation with human scores\n\n";
  if (r.correlation) {
    out += "Videos with human scores: " + std::to_string(r.n_correlated) + "\n\n";
    out += "| Metric | Pearson | Spearman | Kendall |\n";
    out += "|---|---:|---:|---:|\n";
    for (const auto& row : r.correlation->rows) {
      out += "| " + escape_md(row.metric) + " | " + format_fixed(row.pearson, 3) + " | " +
             format_fixed(row.spearman, 3) + " | " + format_fixed(row.kendall, 3) + " |\n";
    }
    if (r.r_squared) out += "\nR² (final score vs human): " + format_fixed(*r.r_squared, 3) + "\n";
  } else {
    out += "_Correlation section absent: " + escape_md(r.correlation_note) + "._\n";
  }

  out += "\n## Configuration\n\n";
  out += "- stride: " + std::to_string(r.config.stride) + "\n";
  out += "- temporal form: " + std::string(to_string(w.temporal_form)) + "\n";
  out += "- fit method: " + (r.config.fit_method.empty() ? std::string("n/a") : r.config.fit_method) + "\n";
  out += "- seed: " + (r.config.seed ? std::to_string(*r.config.seed) : std::string("n/a")) + "\n";
  out += "- backends: `" + (r.config.backends.empty() ? std::string("n/a") : r.config.backends) + "`\n";
  out += "- cosine similarities are clamped to [0, 1] before averaging\n";
  return out;
}

}  // namespace

std::string render(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kTabular: return render_tabular(report);
    case ReportFormat::kStructured: return to_json(report).dump(2) + "\n";
    case ReportFormat::kMarkdown: return render_markdown(report);
  }
  throw Error(ErrorCode::kUnknownFormat, "unknown report format");
}

EvaluationReport parse_structured_report(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    EvaluationReport r;
    r.dataset_id = doc.at("dataset_id").get<std::string>();
    r.generated_at = doc.at("generated_at").get<std::string>();
    for (const auto& m : doc.at("models")) {
      r.models.push_back({m.at("model_name").get<std::string>(), m.at("n_videos").get<std::int64_t>(),
                          m.at("s_similarity").get<double>(), m.at("s_object").get<double>(),
                          m.at("s_temporal").get<double>(), m.at("s_final").get<double>()});
    }
    const auto& w = doc.at("weights");
    r.weights.w1 = w.at("w1").get<double>();
    r.weights.w2 = w.at("w2").get<double>();
    r.weights.w3 = w.at("w3").get<double>();
    r.weights.intercept = w.at("intercept").get<double>();
    auto form = parse_temporal_form(w.at("temporal_form").get<std::string>());
    if (!form) throw Error(ErrorCode::kParseError, "report: unknown temporal_form");
    r.weights.temporal_form = *form;
    if (!doc.at("correlation").is_null()) {
      CorrelationTable t;
      for (const auto& row : doc.at("correlation")) {
        t.rows.push_back({row.at("metric").get<std::string>(), row.at("pearson").get<double>(),
                          row.at("spearman").get<double>(), row.at("kendall").get<double>()});
      }
      r.correlation = std::move(t);
    }
    if (!doc.at("r_squared").is_null()) r.r_squared = doc.at("r_squared").get<double>();
    r.n_correlated = doc.at("n_correlated").get<std::int64_t>();
    r.correlation_note = doc.at("correlation_note").get<std::string>();
    const auto& cfg = doc.at("config");
    r.config.stride = cfg.at("stride").get<int>();
    r.config.backends = cfg.at("backends").get<std::string>();
    r.config.fit_method = cfg.at("fit_method").get<std::string>();
    if (!cfg.at("seed").is_null()) r.config.seed = cfg.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

}  // namespace sstem
