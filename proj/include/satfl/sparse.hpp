#pragma once

// Sparse gradients, Top-Q sparsification with error feedback, and the
// per-satellite steps of sparse incremental aggregation (SIA) and its
// constant-length variant (CL-SIA).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "satfl/errors.hpp"

namespace satfl {

struct DenseVector {
  std::vector<double> values;

  DenseVector() = default;
  explicit DenseVector(std::size_t dim) : values(dim, 0.0) {}
  explicit DenseVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  DenseVector& operator+=(const DenseVector& o) {
    if (o.dim() != dim()) throw ContractViolation("DenseVector +=: dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i) values[i] += o.values[i];
    return *this;
  }
  DenseVector& operator-=(const DenseVector& o) {
    if (o.dim() != dim()) throw ContractViolation("DenseVector -=: dimension mismatch");
    for (std::size_t i = 0; i < dim(); ++i) values[i] -= o.values[i];
    return *this;
  }
  DenseVector& operator*=(double s) {
    for (auto& v : values) v *= s;
    return *this;
  }
  friend DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
  friend DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
  friend DenseVector operator*(double s, DenseVector a) { return a *= s; }
  friend bool operator==(const DenseVector&, const DenseVector&) = default;
};

// Index/value pairs of a vector of dimension `dim`. Indices are strictly
// increasing.
class SparseGradient {
 public:
  using Index = std::uint32_t;

  SparseGradient() = default;
  explicit SparseGradient(std::size_t dim) : dim_(dim) {}
  SparseGradient(std::size_t dim, std::vector<Index> indices, std::vector<double> values)
      : dim_(dim), indices_(std::move(indices)), values_(std::move(values)) {
    if (indices_.size() != values_.size())
      throw ContractViolation("SparseGradient: index/value length mismatch");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] >= dim_) throw IndexError("SparseGradient: index outside dimension");
      if (i > 0 && indices_[i] <= indices_[i - 1])
        throw ContractViolation("SparseGradient: indices must be strictly increasing");
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  std::span<const Index> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  DenseVector densify() const {
    DenseVector d(dim_);
    for (std::size_t i = 0; i < indices_.size(); ++i) d[indices_[i]] = values_[i];
    return d;
  }

  // Adds the stored entries into `acc`.
  void scatter_add(DenseVector& acc) const {
    if (acc.dim() != dim_) throw ContractViolation("scatter_add: dimension mismatch");
    for (std::size_t i = 0; i < indices_.size(); ++i) acc[indices_[i]] += values_[i];
  }

  friend bool operator==(const SparseGradient&, const SparseGradient&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

// Per-satellite residual carried across rounds.
struct ErrorState {
  DenseVector residual;

  ErrorState() = default;
  explicit ErrorState(std::size_t dim) : residual(dim) {}
};

struct SizeModel {
  std::uint64_t value_bits = 32;
  std::uint64_t dim = 7850;

  // Smallest b with 2^b >= dim.
  std::uint64_t index_bits() const {
    std::uint64_t b = 0;
    while ((std::uint64_t{1} << b) < dim) ++b;
    return b;
  }
  std::uint64_t entry_bits() const { return value_bits + index_bits(); }
};

inline std::uint64_t message_bits(const SparseGradient& s, const SizeModel& m) {
  if (s.dim() != m.dim) throw ContractViolation("message_bits: dimension mismatch");
  return s.nnz() * m.entry_bits();
}

inline std::uint64_t dense_bits(const SizeModel& m) { return m.dim * m.value_bits; }

inline std::size_t q_to_Q(double q, std::size_t dim) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q_to_Q: ratio must lie in (0, 1]");
  const double x = q * static_cast<double>(dim);
  const double r = std::round(x);
  // Products such as 0.1 * 7850 may land a few ulps above an integer.
  const double c = std::abs(x - r) <= 1e-9 * std::max(1.0, x) ? r : std::ceil(x);
  return std::max<std::size_t>(1, static_cast<std::size_t>(c));
}

// The Q largest-magnitude nonzero entries, ties broken towards the lower index.
inline SparseGradient top_q(std::span<const double> v, std::size_t Q) {
  std::vector<SparseGradient::Index> order;
  order.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) order.push_back(static_cast<SparseGradient::Index>(i));
  const auto larger = [&](SparseGradient::Index a, SparseGradient::Index b) {
    const double ma = std::abs(v[a]), mb = std::abs(v[b]);
    return ma > mb || (ma == mb && a < b);
  };
  if (order.size() > Q) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(Q), order.end(),
                     larger);
    order.resize(Q);
  }
  std::sort(order.begin(), order.end());
  std::vector<double> vals;
  vals.reserve(order.size());
  for (auto i : order) vals.push_back(v[i]);
  return SparseGradient(v.size(), std::move(order), std::move(vals));
}

inline SparseGradient top_q(const DenseVector& v, std::size_t Q) { return top_q(v.values, Q); }

// Union of supports, values summed on common indices. Values of `a` come
// first in each sum.
inline SparseGradient sparse_add(const SparseGradient& a, const SparseGradient& b) {
  if (a.dim() != b.dim()) throw ContractViolation("sparse_add: dimension mismatch");
  const auto ai = a.indices(), bi = b.indices();
  const auto av = a.values(), bv = b.values();
  std::vector<SparseGradient::Index> idx;
  std::vector<double> val;
  idx.reserve(ai.size() + bi.size());
  val.reserve(ai.size() + bi.size());
  std::size_t i = 0, j = 0;
  while (i < ai.size() || j < bi.size()) {
    if (j == bi.size() || (i < ai.size() && ai[i] < bi[j])) {
      idx.push_back(ai[i]);
      val.push_back(av[i++]);
    } else if (i == ai.size() || bi[j] < ai[i]) {
      idx.push_back(bi[j]);
      val.push_back(bv[j++]);
    } else {
      idx.push_back(ai[i]);
      val.push_back(av[i++] + bv[j++]);
    }
  }
  return SparseGradient(a.dim(), std::move(idx), std::move(val));
}

struct StepResult {
  SparseGradient outgoing;
  // SIA: the satellite's own sparsified contribution. CL-SIA: equals outgoing.
  SparseGradient contribution;
};

namespace detail {

inline DenseVector error_compensated(const DenseVector& g, double data_size, const ErrorState& err) {
  if (g.dim() != err.residual.dim())
    throw ContractViolation("step: gradient and error state dimensions differ");
  if (!(data_size > 0.0)) throw DomainError("step: data size must be positive");
  DenseVector out(g.dim());
  for (std::size_t i = 0; i < g.dim(); ++i) out[i] = data_size * g[i] + err.residual[i];
  return out;
}

}  // namespace detail

// SIA at one satellite: error feedback, Top-Q on its own gradient, residual
// update, then merge with the incoming aggregate.
inline StepResult sia_step(const DenseVector& g, double data_size, ErrorState& err,
                           const SparseGradient& incoming, std::size_t Q) {
  if (incoming.dim() != g.dim()) throw ContractViolation("sia_step: incoming dimension mismatch");
  DenseVector comp = detail::error_compensated(g, data_size, err);
  SparseGradient kept = top_q(comp, Q);
  const auto idx = kept.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) comp[idx[i]] = 0.0;
  err.residual = std::move(comp);
  SparseGradient out = sparse_add(incoming, kept);
  return {std::move(out), std::move(kept)};
}

// CL-SIA at one satellite: error feedback, merge with the incoming
// aggregate, Top-Q on the merged vector, residual = merged - sent.
inline StepResult clsia_step(const DenseVector& g, double data_size, ErrorState& err,
                             const SparseGradient& incoming, std::size_t Q) {
  if (incoming.dim() != g.dim()) throw ContractViolation("clsia_step: incoming dimension mismatch");
  DenseVector merged = incoming.densify();
  const DenseVector comp = detail::error_compensated(g, data_size, err);
  merged += comp;
  SparseGradient out = top_q(merged, Q);
  const auto idx = out.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) merged[idx[i]] = 0.0;
  err.residual = std::move(merged);
  return {out, out};
}

}  // namespace satfl
