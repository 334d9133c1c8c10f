#pragma once

// Deterministic accumulation structures behind the CDF estimators.  Both are
// built so that results do not depend on the order in which samples were
// supplied or on how query work is scheduled: every floating-point sum is
// performed over a fixed reduction tree.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "raregap/core.hpp"

namespace raregap::detail {

// Fixed-shape pairwise summation over a set of slots (power-of-two padded).
// Updating one slot refreshes its ancestors; the root always equals the sum
// of all slots taken in the same bracketing, independent of update order.
class PairwiseSumTree {
 public:
  explicit PairwiseSumTree(std::size_t slots) {
    leaves_ = 1;
    while (leaves_ < slots) leaves_ <<= 1;
    nodes_.assign(2 * leaves_, 0.0);
  }

  void set(std::size_t slot, double value) {
    std::size_t k = leaves_ + slot;
    nodes_[k] = value;
    for (k >>= 1; k >= 1; k >>= 1) nodes_[k] = nodes_[2 * k] + nodes_[2 * k + 1];
  }

  double total() const { return nodes_[1]; }

 private:
  std::size_t leaves_ = 1;
  std::vector<double> nodes_;
};

// Static space-partitioning tree over a weighted point set answering lower
// orthant queries: total weight of stored points componentwise <= q.
//
// Points are kept in a canonical internal order (stable sorts over total
// orders), subtree weights are pre-accumulated bottom-up, and queries walk
// the tree depth-first, so the returned double is bit-identical for any
// insertion order of identical (point, weight) multisets.
class OrthantWeightTree {
 public:
  OrthantWeightTree(int dimension, std::vector<double> points_flat,
                    std::vector<double> weights)
      : dim_(dimension), pts_(std::move(points_flat)), w_(std::move(weights)) {
    if (dim_ < 1) throw std::invalid_argument("OrthantWeightTree: dimension must be >= 1");
    if (pts_.size() != w_.size() * static_cast<std::size_t>(dim_))
      throw std::invalid_argument("OrthantWeightTree: points/weights size mismatch");
    const std::size_t n = w_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (n > 0) {
      nodes_.reserve(2 * (n / kLeafSize + 2));
      root_ = build(0, n, 0);
    }
  }

  double query(std::span<const double> q) const {
    if (nodes_.empty()) return 0.0;
    double acc = 0.0;
    descend(root_, q, acc);
    return acc;
  }

  double total_weight() const { return nodes_.empty() ? 0.0 : nodes_[root_].weight; }

 private:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    std::uint32_t begin = 0, end = 0;  // leaf range into order_
    std::int32_t left = -1, right = -1;
    double weight = 0.0;
  };

  std::span<const double> pt(std::size_t i) const {
    return {pts_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }

  std::int32_t build(std::size_t lo, std::size_t hi, int depth) {
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    lo_corner_.resize(nodes_.size() * dim_);
    hi_corner_.resize(nodes_.size() * dim_);

    if (hi - lo <= kLeafSize) {
      std::stable_sort(order_.begin() + lo, order_.begin() + hi,
                       [&](std::size_t a, std::size_t b) {
                         return lexicographic_less(pt(a), pt(b));
                       });
      double wsum = 0.0;
      for (std::size_t k = lo; k < hi; ++k) wsum += w_[order_[k]];
      Node& nd = nodes_[id];
      nd.begin = static_cast<std::uint32_t>(lo);
      nd.end = static_cast<std::uint32_t>(hi);
      nd.weight = wsum;
      set_corners(id, lo, hi);
      return id;
    }

    const int axis = depth % dim_;
    std::stable_sort(order_.begin() + lo, order_.begin() + hi,
                     [&](std::size_t a, std::size_t b) {
                       const auto pa = pt(a), pb = pt(b);
                       if (pa[axis] != pb[axis]) return pa[axis] < pb[axis];
                       return lexicographic_less(pa, pb);
                     });
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::int32_t l = build(lo, mid, depth + 1);
    const std::int32_t r = build(mid, hi, depth + 1);
    Node& nd = nodes_[id];
    nd.left = l;
    nd.right = r;
    nd.weight = nodes_[l].weight + nodes_[r].weight;
    set_corners(id, lo, hi);
    return id;
  }

  void set_corners(std::int32_t id, std::size_t lo, std::size_t hi) {
    double* cmin = lo_corner_.data() + static_cast<std::size_t>(id) * dim_;
    double* cmax = hi_corner_.data() + static_cast<std::size_t>(id) * dim_;
    for (int d = 0; d < dim_; ++d) {
      cmin[d] = pt(order_[lo])[d];
      cmax[d] = pt(order_[lo])[d];
    }
    for (std::size_t k = lo + 1; k < hi; ++k) {
      const auto p = pt(order_[k]);
      for (int d = 0; d < dim_; ++d) {
        cmin[d] = std::min(cmin[d], p[d]);
        cmax[d] = std::max(cmax[d], p[d]);
      }
    }
  }

  void descend(std::int32_t id, std::span<const double> q, double& acc) const {
    const Node& nd = nodes_[id];
    const double* cmin = lo_corner_.data() + static_cast<std::size_t>(id) * dim_;
    const double* cmax = hi_corner_.data() + static_cast<std::size_t>(id) * dim_;
    bool all_inside = true;
    for (int d = 0; d < dim_; ++d) {
      if (cmin[d] > q[d]) return;  // every point exceeds q in coordinate d
      if (cmax[d] > q[d]) all_inside = false;
    }
    if (all_inside) {
      acc += nd.weight;
      return;
    }
    if (nd.left < 0) {  // leaf: scan in canonical stored order
      for (std::uint32_t k = nd.begin; k < nd.end; ++k) {
        const std::size_t i = order_[k];
        const auto p = pt(i);
        bool ok = true;
        for (int d = 0; d < dim_; ++d)
          if (p[d] > q[d]) {
            ok = false;
            break;
          }
        if (ok) acc += w_[i];
      }
      return;
    }
    descend(nd.left, q, acc);
    descend(nd.right, q, acc);
  }

  int dim_;
  std::vector<double> pts_;
  std::vector<double> w_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> lo_corner_, hi_corner_;
  std::int32_t root_ = -1;
};

}  // namespace raregap::detail
