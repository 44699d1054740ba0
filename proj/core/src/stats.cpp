#include "sstem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sstem/error.hpp"

namespace sstem::stats {

void check_series(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "series lengths differ (" + std::to_string(x.size()) + " vs " +
                                                 std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorCode::kInvalidArgument, "series need at least 2 points");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite)) {
    throw Error(ErrorCode::kInvalidArgument, "series contain non-finite values");
  }
}

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_labels(const PairedSeries& s) {
  if (!s.labels.empty() && s.labels.size() != s.x.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count does not match series length");
  }
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_series(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kDegenerateSeries, "constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> fractional_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double avg = static_cast<double>(i + j + 2) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_series(x, y);
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  check_series(x, y);
  const std::size_t n = x.size();
  // O(n^2) pair scan; evaluation sets here are tens to hundreds of videos.
  long long concordant = 0;
  long long discordant = 0;
  long long ties_x = 0;  // pairs tied in x (including joint ties)
  long long ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      ((dx > 0.0) == (dy > 0.0) ? concordant : discordant)++;
    }
  }
  const long long n0 = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const double denom = std::sqrt(static_cast<double>(n0 - ties_x) * static_cast<double>(n0 - ties_y));
  if (denom == 0.0) throw Error(ErrorCode::kDegenerateSeries, "constant series");
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

double r_squared(std::span<const double> x, std::span<const double> y) {
  check_series(x, y);
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::kDegenerateSeries, "constant predictor");
  if (syy == 0.0) throw Error(ErrorCode::kDegenerateSeries, "constant response");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
  }
  return 1.0 - ss_res / syy;
}

double pearson(const PairedSeries& s) {
  check_labels(s);
  return pearson(s.x, s.y);
}
double spearman(const PairedSeries& s) {
  check_labels(s);
  return spearman(s.x, s.y);
}
double kendall_tau_b(const PairedSeries& s) {
  check_labels(s);
  return kendall_tau_b(s.x, s.y);
}
double r_squared(const PairedSeries& s) {
  check_labels(s);
  return r_squared(s.x, s.y);
}

CorrelationTable correlation_table(const LabeledValues& human, const std::vector<NamedMetric>& metrics) {
  if (human.labels.size() != human.values.size()) {
    throw Error(ErrorCode::kAlignmentError, "human scores: label count does not match value count");
  }
  std::map<std::string, std::size_t> human_index;
  for (std::size_t i = 0; i < human.labels.size(); ++i) {
    if (!human_index.emplace(human.labels[i], i).second) {
      throw Error(ErrorCode::kAlignmentError, "human scores: duplicate label '" + human.labels[i] + "'");
    }
  }

  CorrelationTable table;
  for (const auto& m : metrics) {
    const auto& mv = m.values;
    if (mv.labels.size() != mv.values.size()) {
      throw Error(ErrorCode::kAlignmentError, m.name + ": label count does not match value count");
    }
    if (mv.labels.size() != human.labels.size()) {
      throw Error(ErrorCode::kAlignmentError, m.name + ": has " + std::to_string(mv.labels.size()) +
                                                  " labels, human scores have " +
                                                  std::to_string(human.labels.size()));
    }
    std::vector<double> aligned(human.labels.size());
    std::vector<bool> filled(human.labels.size(), false);
    for (std::size_t i = 0; i < mv.labels.size(); ++i) {
      auto it = human_index.find(mv.labels[i]);
      if (it == human_index.end()) {
        throw Error(ErrorCode::kAlignmentError, m.name + ": label '" + mv.labels[i] + "' has no human score");
      }
      if (filled[it->second]) {
        throw Error(ErrorCode::kAlignmentError, m.name + ": duplicate label '" + mv.labels[i] + "'");
      }
      aligned[it->second] = mv.values[i];
      filled[it->second] = true;
    }
    try {
      table.rows.push_back(CorrelationRow{m.name, pearson(aligned, human.values), spearman(aligned, human.values),
                                          kendall_tau_b(aligned, human.values)});
    } catch (const Error& e) {
      throw e.with_context(m.name);
    }
  }
  return table;
}

}  // namespace sstem::stats
