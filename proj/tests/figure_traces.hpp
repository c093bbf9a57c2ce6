#pragma once

// Constructed 12-dimensional gradients for the three-satellite chain traces
// (satellite 1 -> 2 -> 3, Q = 3, unit data sizes, zero residuals). Indices in
// the expectations are 1-based to match how the traces are usually drawn.

#include <set>
#include <vector>

namespace trace {

inline constexpr std::size_t kDim = 12;
inline constexpr std::size_t kQ = 3;

// Selected top-3 supports: g1 -> {4,8,10}, g2 -> {2,4,12}.
inline const std::vector<double> kG1{0.5, 0.0, 0.2, 5.0, 0.0, 0.25, 0.0, 4.0, 0.1, 3.0, 0.0, 0.3};
inline const std::vector<double> kG2{0.0, 6.0, 0.4, 2.0, 0.1, 0.0, 0.0, 0.5, 0.0, 0.0, 0.2, 7.0};

// Sparse incremental aggregation: satellite 3 selects {2,4,11}.
inline const std::vector<double> kG3Sia{0.3, 2.0, 0.0, 3.0, 0.0, 0.1, 0.0, 0.0, 0.2, 0.0, 4.0, 0.0};
inline const std::set<std::size_t> kSiaHop1{4, 8, 10};
inline const std::set<std::size_t> kSiaHop2{2, 4, 8, 10, 12};
inline const std::set<std::size_t> kSiaHop3{2, 4, 8, 10, 11, 12};

// Chained variant: the merged vector at satellite 3 selects {2,10,12}.
inline const std::vector<double> kG3Cl{0.0, 1.0, 0.0, -6.0, 0.2, 0.0, 0.0, 0.0, 0.0, 5.0, 0.3, 0.0};
inline const std::set<std::size_t> kClHop1{4, 8, 10};
inline const std::set<std::size_t> kClHop2{2, 4, 12};
inline const std::set<std::size_t> kClHop3{2, 10, 12};

template <class Sparse>
std::set<std::size_t> one_based(const Sparse& s) {
  std::set<std::size_t> out;
  for (auto i : s.indices()) out.insert(static_cast<std::size_t>(i) + 1);
  return out;
}

}  // namespace trace
