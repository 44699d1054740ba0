#pragma once

#include <span>

namespace sstem {

// Mean of `values` with the sum carried as an error-free (hi, lo) pair and the
// division corrected by its exact remainder. The result is the correctly
// rounded mean for short inputs, so e.g. mean{0.8, 0.6, 0.7} == 0.7.
// Precondition: values non-empty.
double accurate_mean(std::span<const double> values);

// dot(a, b) / sqrt(|a|^2 |b|^2). Returns 0 when either vector has zero norm.
// cosine(v, v) == 1 exactly for any non-zero v.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Clamp to [0, 1]; negative cosine maps to 0.
double clamp_unit(double value);

}  // namespace sstem
