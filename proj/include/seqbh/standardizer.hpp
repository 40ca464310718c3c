#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seqbh/ladder.hpp"

namespace seqbh {

// One distinct abscissa of a standardizing function. When several critical
// values coincide at x, several integer levels are pinned there at once:
// `in` is the smallest, `out` the largest, and `at` the value taken exactly
// at x. A statistic equal to a critical value has reached every level pinned
// to it, so `at` is the extreme level of the run (the smallest for lower
// critical values, the largest for upper ones), and the function jumps across
// the remaining levels on the appropriate side. Without ties in==at==out and
// the map is the usual continuous interpolation through the knots.
struct StandardizerKnot {
  double x;
  double in;
  double at;
  double out;
};

// Strictly increasing piecewise-linear map with unit slope outside the
// outermost knots. Evaluation is exact at knots; between knots it
// interpolates linearly from out[i] to in[i+1].
class Standardizer {
 public:
  explicit Standardizer(std::vector<StandardizerKnot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw std::invalid_argument("Standardizer: need at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const auto& k = knots_[i];
      if (!(k.in <= k.at && k.at <= k.out))
        throw std::invalid_argument("Standardizer: knot levels out of order");
      if (i > 0) {
        if (!(knots_[i - 1].x < k.x))
          throw std::invalid_argument("Standardizer: knot abscissae must be strictly increasing");
        if (!(knots_[i - 1].out < k.in))
          throw std::invalid_argument("Standardizer: knot levels must be strictly increasing");
      }
    }
  }

  double operator()(double x) const {
    if (std::isnan(x)) return x;
    const auto& front = knots_.front();
    const auto& back = knots_.back();
    if (x <= front.x) return x == front.x ? front.at : front.in + (x - front.x);
    if (x >= back.x) return x == back.x ? back.at : back.out + (x - back.x);
    // strictly between front.x and back.x
    auto it = std::lower_bound(knots_.begin(), knots_.end(), x,
                               [](const StandardizerKnot& k, double v) { return k.x < v; });
    if (it->x == x) return it->at;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.x) / (hi.x - lo.x);
    double v = lo.out + t * (hi.in - lo.out);
    // x strictly inside the segment must map strictly inside (lo.out, hi.in),
    // or threshold comparisons against pinned levels would fire one ulp early;
    // rounding can land the interpolation exactly on a knot level.
    if (v >= hi.in) v = std::nextafter(hi.in, lo.out);
    if (v <= lo.out) v = std::nextafter(lo.out, hi.in);
    return v;
  }

  const std::vector<StandardizerKnot>& knots() const { return knots_; }

 private:
  std::vector<StandardizerKnot> knots_;
};

namespace detail {

// Collapse pinned (x, level) pairs, already ordered with strictly increasing
// level, into knots. `upper` selects which end of a tied run the map takes at
// the shared abscissa.
inline std::vector<StandardizerKnot> collapse_pins(const std::vector<std::pair<double, double>>& pins,
                                                   bool upper) {
  std::vector<StandardizerKnot> knots;
  for (const auto& [x, level] : pins) {
    if (std::isnan(x)) throw std::invalid_argument("Standardizer: critical value is NaN");
    if (!knots.empty() && knots.back().x == x) {
      knots.back().out = level;
      if (upper) knots.back().at = level;
    } else {
      if (!knots.empty() && !(knots.back().x < x))
        throw std::invalid_argument("Standardizer: critical values out of order");
      knots.push_back({x, level, level, level});
    }
  }
  return knots;
}

}  // namespace detail

// Map pinning A_s to -(K-s+1) and B_s to K-s+1 for the two-boundary
// procedure: phi(A_1)=-K, ..., phi(A_K)=-1, phi(B_K)=1, ..., phi(B_1)=K.
inline Standardizer build_full_standardizer(const CriticalLadder& ladder) {
  const int k = ladder.size();
  std::vector<std::pair<double, double>> lower_pins, upper_pins;
  lower_pins.reserve(k);
  upper_pins.reserve(k);
  for (int s = 1; s <= k; ++s) lower_pins.emplace_back(ladder.a(s), -static_cast<double>(k - s + 1));
  for (int s = k; s >= 1; --s) upper_pins.emplace_back(ladder.b(s), static_cast<double>(k - s + 1));
  auto knots = detail::collapse_pins(lower_pins, /*upper=*/false);
  auto upper_knots = detail::collapse_pins(upper_pins, /*upper=*/true);
  knots.insert(knots.end(), upper_knots.begin(), upper_knots.end());
  return Standardizer(std::move(knots));
}

inline Standardizer build_full_standardizer(const CriticalLadder& ladder, int k) {
  if (k != ladder.size())
    throw std::invalid_argument("build_full_standardizer: ladder has " +
                                std::to_string(ladder.size()) + " rungs, expected " +
                                std::to_string(k));
  return build_full_standardizer(ladder);
}

// Map pinning B_s to K-s+1 for the rejective procedure, with unit slope
// below B_K: phi(x) = x - B_K + 1 there.
inline Standardizer build_rejective_standardizer(const RejectiveLadder& ladder) {
  const int k = ladder.size();
  std::vector<std::pair<double, double>> pins;
  pins.reserve(k);
  for (int s = k; s >= 1; --s) pins.emplace_back(ladder.b(s), static_cast<double>(k - s + 1));
  return Standardizer(detail::collapse_pins(pins, /*upper=*/true));
}

inline Standardizer build_rejective_standardizer(const RejectiveLadder& ladder, int k) {
  if (k != ladder.size())
    throw std::invalid_argument("build_rejective_standardizer: ladder has " +
                                std::to_string(ladder.size()) + " rungs, expected " +
                                std::to_string(k));
  return build_rejective_standardizer(ladder);
}

}  // namespace seqbh
