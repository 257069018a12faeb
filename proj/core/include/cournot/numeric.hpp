#pragma once

#include <functional>
#include <span>

namespace cournot {

// Sum of the values taken in ascending order. The result depends only on the
// multiset of inputs, so permuting firms never changes a total bit-for-bit.
double ordered_sum(std::span<const double> values);

struct Maximum {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for the maximum of a unimodal function on [lo, hi].
// Stops when the bracket is narrower than `x_tol`; both endpoints are also
// compared so boundary optima are returned exactly.
Maximum golden_section_max(const std::function<double(double)>& f, double lo,
                           double hi, double x_tol);

// Percentile with linear interpolation between order statistics
// (position p * (n - 1)), p in [0, 1]. Selection-based, O(n).
double percentile(std::span<const double> values, double p);

double mean(std::span<const double> values);

}  // namespace cournot
