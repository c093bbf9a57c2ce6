#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code path it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

// Frozen closed-form values, evaluated independently in double precision
// with mu = 3.98e14, r_E = 6.371e6, k_B = 1.380649e-23, c = 299792458.
inline constexpr double kSpeed2000km = 6895.29521959232;
inline constexpr double kPeriod2000km = 7627.888659060208;
inline constexpr double kSpeed500km = 7610.8219452683925;
inline constexpr double kPeriod500km = 5672.418374269101;
inline constexpr double kChordK8 = 6406886.024656333;        // 2 r sin(pi/8), h = 2000 km
inline constexpr double kChordPerigeeK8 = 7733795.566651981;  // r cos(pi/8)
inline constexpr double kChordPerigeeK4 = 5919190.865312589;  // r cos(pi/4)
inline constexpr double kPathLoss1000kmDb = 178.468383135163;
inline constexpr double kPathLossChordDb = 194.6013230986802;
inline constexpr double kSnrChord = 0.37827804954982863;
inline constexpr double kRateChord = 231433481.1188871;
inline constexpr double kTxDensePlane = 0.008683272577003113;  // 2,009,600 bits at kRateChord

// Full sort by (|v| desc, index asc), keep the first Q nonzero entries.
inline std::set<std::size_t> top_q_support(const std::vector<double>& v, std::size_t Q) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) all.emplace_back(std::abs(v[i]), i);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < std::min(Q, all.size()); ++i) out.insert(all[i].second);
  return out;
}

inline std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// Central differences of f at x along every coordinate.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Softmax cross-entropy written directly from its definition.
inline double cross_entropy(const std::vector<double>& w, const std::vector<float>& x, std::size_t label,
                            std::size_t classes) {
  const std::size_t f = x.size();
  std::vector<double> z(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    z[c] = w[c * (f + 1) + f];
    for (std::size_t j = 0; j < f; ++j) z[c] += w[c * (f + 1) + j] * x[j];
  }
  double denom = 0.0;
  for (double v : z) denom += std::exp(v);
  return -std::log(std::exp(z[label]) / denom);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace oracle
