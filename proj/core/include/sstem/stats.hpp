#pragma once

// Correlation and goodness-of-fit statistics for validating metric scores
// against human judgements.
//
// Ties: Spearman uses fractional (tie-averaged) ranks, Kendall is tau-b.
// Every coefficient throws kDegenerateSeries when a series has no variation
// (zero denominator) rather than returning NaN.

#include <span>
#include <string>
#include <vector>

#include "sstem/model.hpp"

namespace sstem::stats {

struct PairedSeries {
  std::vector<std::string> labels;
  std::vector<double> x;
  std::vector<double> y;
};

// Throws kInvalidArgument unless lengths match, n >= 2, values are finite and
// (when present) labels have the same length.
void check_series(std::span<const double> x, std::span<const double> y);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
// Coefficient of determination of the least-squares line of y on x.
double r_squared(std::span<const double> x, std::span<const double> y);

double pearson(const PairedSeries& s);
double spearman(const PairedSeries& s);
double kendall_tau_b(const PairedSeries& s);
double r_squared(const PairedSeries& s);

// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> fractional_ranks(std::span<const double> values);

struct LabeledValues {
  std::vector<std::string> labels;
  std::vector<double> values;
};

struct NamedMetric {
  std::string name;
  LabeledValues values;
};

// Aligns every metric to `human` by label and computes all three
// coefficients. Throws kAlignmentError when a metric's label set differs from
// the human label set (missing, extra or duplicate labels). Coefficient errors
// are rethrown with the metric name attached.
CorrelationTable correlation_table(const LabeledValues& human, const std::vector<NamedMetric>& metrics);

}  // namespace sstem::stats
