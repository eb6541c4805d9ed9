#pragma once

#include <cmath>

namespace leocell {

template <typename Eval>
std::optional<std::int64_t> first_cycle_below(Eval eval, double value0,
                                              double slope, double floor,
                                              std::int64_t lo,
                                              std::int64_t hi) {
  if (lo > hi) return std::nullopt;
  if (eval(lo) < floor) return lo;
  // Non-decreasing on this piece: it never gets lower than at `lo`.
  if (!(slope > 0.0)) return std::nullopt;

  // value0 - slope*c < floor  <=>  c > (value0 - floor) / slope
  double estimate = std::floor((value0 - floor) / slope) + 1.0;
  if (!(estimate <= static_cast<double>(hi))) estimate = static_cast<double>(hi);
  if (estimate < static_cast<double>(lo)) estimate = static_cast<double>(lo);
  auto c = static_cast<std::int64_t>(estimate);

  // The estimate is off by at most a rounding step; settle it on the exact
  // model values.
  while (c > lo && eval(c - 1) < floor) --c;
  while (c <= hi && !(eval(c) < floor)) ++c;
  if (c > hi) return std::nullopt;
  return c;
}

}  // namespace leocell
