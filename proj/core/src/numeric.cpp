#include "cournot/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cournot {

double ordered_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  return total;
}

Maximum golden_section_max(const std::function<double(double)>& f, double lo,
                           double hi, double x_tol) {
  if (!(hi >= lo)) throw std::invalid_argument("golden_section_max: empty bracket");
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }

  Maximum best{0.5 * (a + b), f(0.5 * (a + b))};
  for (double x : {lo, hi, c, d}) {
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty series");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("percentile rank outside [0, 1]");

  std::vector<double> work(values.begin(), values.end());
  const double pos = p * static_cast<double>(work.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lower);

  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(lower), work.end());
  const double lo = work[lower];
  if (frac == 0.0 || lower + 1 >= work.size()) return lo;
  // The next order statistic is the minimum of the upper partition.
  const double hi = *std::min_element(work.begin() + static_cast<std::ptrdiff_t>(lower) + 1, work.end());
  return lo + frac * (hi - lo);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty series");
  return ordered_sum(values) / static_cast<double>(values.size());
}

}  // namespace cournot
