#include "balrisk/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "balrisk/error.hpp"

namespace balrisk {

std::vector<Neighbor> brute_force_knn(std::span<const double> points, std::size_t dim,
                                      std::span<const double> query, std::size_t k) {
  std::size_t n = dim ? points.size() / dim : 0;
  if (k < 1 || k > n) throw DomainError("k must satisfy 1 <= k <= n");
  std::vector<Neighbor> all(n);
  for (std::size_t i = 0; i < n; ++i) {
    all[i] = {squared_distance(points.data() + i * dim, query.data(), dim), i};
  }
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end());
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

KdTree::KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size)
    : dim_(dim), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (dim == 0) throw DomainError("k-d tree needs dimension >= 1");
  std::size_t n = points.size() / dim;
  index_.resize(n);
  std::iota(index_.begin(), index_.end(), std::size_t{0});
  points_.assign(points.begin(), points.end());
  if (n > 0) build(0, n);

  // Reorder the coordinates to tree order for locality.
  std::vector<double> ordered(points_.size());
  for (std::size_t s = 0; s < n; ++s) {
    std::copy_n(points.data() + index_[s] * dim, dim, ordered.data() + s * dim);
  }
  points_ = std::move(ordered);
}

int KdTree::build(std::size_t begin, std::size_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= leaf_size_) return id;

  // Split on the widest coordinate at the median.
  std::size_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t j = 0; j < dim_; ++j) {
    double lo = points_[index_[begin] * dim_ + j], hi = lo;
    for (std::size_t s = begin + 1; s < end; ++s) {
      double v = points_[index_[s] * dim_ + j];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = j;
    }
  }
  if (best_spread <= 0.0) return id;  // all points coincide

  std::size_t mid = begin + (end - begin) / 2;
  auto coord = [&](std::size_t i) { return points_[i * dim_ + best_dim]; };
  std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                   index_.begin() + static_cast<std::ptrdiff_t>(mid),
                   index_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return coord(a) < coord(b); });
  double split = coord(index_[mid]);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[id].split_dim = best_dim;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<Neighbor> KdTree::knn(std::span<const double> query, std::size_t k) const {
  if (k < 1 || k > size()) throw DomainError("k must satisfy 1 <= k <= n");
  if (query.size() != dim_) throw DomainError("query dimension does not match the tree");
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  search(0, query.data(), k, heap);
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

void KdTree::search(int id, const double* query, std::size_t k, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.left < 0) {
    for (std::size_t s = node.begin; s < node.end; ++s) {
      Neighbor cand{squared_distance(points_.data() + s * dim_, query, dim_), index_[s]};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  double diff = query[node.split_dim] - node.split;
  int near = diff <= 0.0 ? node.left : node.right;
  int far = diff <= 0.0 ? node.right : node.left;
  search(near, query, k, heap);
  // Points across the plane are at least diff^2 away; ties must still be
  // visited because a smaller index can win on equal distance.
  if (heap.size() < k || diff * diff <= heap.front().dist_sq) search(far, query, k, heap);
}

}  // namespace balrisk
