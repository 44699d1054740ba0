#include "sstem/aggregation.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>

#include "sstem/error.hpp"

namespace sstem {

using nlohmann::json;

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::kOls: return "ols";
    case FitMethod::kOlsIntercept: return "ols_intercept";
    case FitMethod::kSimplex: return "simplex";
  }
  return "unknown";
}

std::optional<FitMethod> parse_fit_method(std::string_view text) {
  if (text == "ols") return FitMethod::kOls;
  if (text == "ols_intercept" || text == "ols-intercept") return FitMethod::kOlsIntercept;
  if (text == "simplex") return FitMethod::kSimplex;
  return std::nullopt;
}

namespace {

double temporal_term(double s_temporal, TemporalForm form) {
  return form == TemporalForm::kDirect ? s_temporal : 1.0 - s_temporal;
}

// Relative pivot threshold below which a column counts as dependent.
constexpr double kRankThreshold = 1e-10;

std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.cols() == 0) return Eigen::VectorXd();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < a.cols()) return std::nullopt;
  return Eigen::VectorXd(qr.solve(b));
}

Eigen::MatrixXd features(const std::vector<FitRow>& rows, TemporalForm form) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& s = rows[i].scores;
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = s.s_similarity;
    x(r, 1) = s.s_object;
    x(r, 2) = temporal_term(s.s_temporal, form);
  }
  return x;
}

Eigen::VectorXd targets(const std::vector<FitRow>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].human;
  return y;
}

WeightVector fit_unconstrained(const std::vector<FitRow>& rows, TemporalForm form, bool intercept) {
  Eigen::MatrixXd x = features(rows, form);
  if (intercept) {
    x.conservativeResize(Eigen::NoChange, 4);
    x.col(3).setOnes();
  }
  auto w = least_squares(x, targets(rows));
  if (!w) {
    throw Error(ErrorCode::kRankDeficient,
                "design matrix has rank below " + std::to_string(x.cols()) + " unknowns");
  }
  WeightVector out;
  out.w1 = (*w)(0);
  out.w2 = (*w)(1);
  out.w3 = (*w)(2);
  out.intercept = intercept ? (*w)(3) : 0.0;
  out.temporal_form = form;
  return out;
}

WeightVector fit_simplex(const std::vector<FitRow>& rows, TemporalForm form) {
  const Eigen::MatrixXd x = features(rows, form);
  const Eigen::VectorXd y = targets(rows);

  std::optional<WeightVector> best;
  double best_loss = std::numeric_limits<double>::infinity();

  // Each non-empty support set is one face of the simplex. On a face with
  // support S and pivot k = max(S), substituting w_k = 1 - sum of the others
  // gives an unconstrained problem in |S| - 1 unknowns.
  for (unsigned mask = 1; mask < 8; ++mask) {
    std::vector<int> support;
    for (int i = 0; i < 3; ++i) {
      if (mask & (1u << i)) support.push_back(i);
    }
    const int pivot = support.back();
    support.pop_back();

    Eigen::MatrixXd a(x.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) {
      a.col(static_cast<Eigen::Index>(j)) = x.col(support[j]) - x.col(pivot);
    }
    const Eigen::VectorXd b = y - x.col(pivot);
    auto sol = least_squares(a, b);
    if (!sol) continue;

    std::array<double, 3> w{0.0, 0.0, 0.0};
    bool feasible = true;
    for (std::size_t j = 0; j < support.size(); ++j) {
      double v = (*sol)(static_cast<Eigen::Index>(j));
      if (v < -1e-12) feasible = false;
      w[support[j]] = std::max(v, 0.0);
    }
    double rest = 0.0;
    for (int i = 0; i < 3; ++i) {
      if (i != pivot) rest += w[i];
    }
    w[pivot] = 1.0 - rest;
    if (w[pivot] < -1e-12) feasible = false;
    if (!feasible) continue;
    w[pivot] = std::max(w[pivot], 0.0);

    WeightVector cand{w[0], w[1], w[2], 0.0, form};
    const double loss = evaluate_loss(rows, cand);
    if (loss < best_loss) {
      best_loss = loss;
      best = cand;
    }
  }
  // The three vertices are always feasible, so `best` is set.
  return *best;
}

}  // namespace

double aggregate(const StageScores& scores, const WeightVector& weights) {
  return weights.w1 * scores.s_similarity + weights.w2 * scores.s_object +
         weights.w3 * temporal_term(scores.s_temporal, weights.temporal_form) + weights.intercept;
}

double evaluate_loss(const std::vector<FitRow>& rows, const WeightVector& weights) {
  if (rows.empty()) throw Error(ErrorCode::kTooFewSamples, "loss over zero rows");
  double sum = 0.0;
  for (const auto& r : rows) {
    const double d = aggregate(r.scores, weights) - r.human;
    sum += d * d;
  }
  return sum / static_cast<double>(rows.size());
}

FitResult fit_weights(const std::vector<FitRow>& rows, FitMethod method, TemporalForm temporal_form) {
  const std::size_t needed = method == FitMethod::kOls ? 3 : method == FitMethod::kOlsIntercept ? 4 : 1;
  if (rows.size() < needed) {
    throw Error(ErrorCode::kTooFewSamples, std::string(to_string(method)) + " needs at least " +
                                               std::to_string(needed) + " rows, got " + std::to_string(rows.size()));
  }
  for (const auto& r : rows) {
    const auto& s = r.scores;
    if (!std::isfinite(s.s_similarity) || !std::isfinite(s.s_object) || !std::isfinite(s.s_temporal) ||
        !std::isfinite(r.human)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite value in row " + s.video_id);
    }
  }

  FitResult out;
  out.method = method;
  out.n_samples = static_cast<std::int64_t>(rows.size());
  switch (method) {
    case FitMethod::kOls: out.weights = fit_unconstrained(rows, temporal_form, false); break;
    case FitMethod::kOlsIntercept: out.weights = fit_unconstrained(rows, temporal_form, true); break;
    case FitMethod::kSimplex: out.weights = fit_simplex(rows, temporal_form); break;
  }
  out.loss = evaluate_loss(rows, out.weights);
  return out;
}

SplitRows split_rows(const DatasetManifest& manifest, const std::vector<FitRow>& rows) {
  if (manifest.split.empty()) {
    throw Error(ErrorCode::kInvalidManifest, "manifest has empty optimization and validation splits");
  }
  SplitRows out;
  for (const auto& r : rows) {
    auto it = manifest.split.find(r.scores.video_id);
    if (it == manifest.split.end()) {
      throw Error(ErrorCode::kUnsplitVideo, "video '" + r.scores.video_id + "' is not assigned to a split");
    }
    (it->second == SplitRole::kOptimization ? out.optimization : out.validation).push_back(r);
  }
  return out;
}

std::string serialize_fit_result(const FitResult& fit) {
  json doc = {{"w1", fit.weights.w1},
              {"w2", fit.weights.w2},
              {"w3", fit.weights.w3},
              {"intercept", fit.weights.intercept},
              {"temporal_form", to_string(fit.weights.temporal_form)},
              {"method", to_string(fit.method)},
              {"loss", fit.loss},
              {"n_samples", fit.n_samples}};
  return doc.dump(2) + "\n";
}

FitResult parse_fit_result(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    FitResult fit;
    fit.weights.w1 = doc.at("w1").get<double>();
    fit.weights.w2 = doc.at("w2").get<double>();
    fit.weights.w3 = doc.at("w3").get<double>();
    fit.weights.intercept = doc.value("intercept", 0.0);
    auto form = parse_temporal_form(doc.value("temporal_form", std::string("direct")));
    if (!form) throw Error(ErrorCode::kParseError, "weights: unknown temporal_form");
    fit.weights.temporal_form = *form;
    auto method = parse_fit_method(doc.value("method", std::string("ols")));
    if (!method) throw Error(ErrorCode::kParseError, "weights: unknown method");
    fit.method = *method;
    fit.loss = doc.value("loss", 0.0);
    fit.n_samples = doc.value("n_samples", std::int64_t{0});
    return fit;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("weights: ") + e.what());
  }
}

}  // namespace sstem
