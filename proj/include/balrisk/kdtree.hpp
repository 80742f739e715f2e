#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace balrisk {

struct Neighbor {
  double dist_sq = 0.0;
  std::size_t index = 0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) noexcept {
    return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// The single distance routine shared by every search path, so that brute force
// and tree search compare bit-identical values.
inline double squared_distance(const double* a, const double* b, std::size_t dim) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

// k smallest (distance, index) pairs by exhaustive scan, ascending.
std::vector<Neighbor> brute_force_knn(std::span<const double> points, std::size_t dim,
                                      std::span<const double> query, std::size_t k);

// Exact k-d tree over a row-major point set. Results are ordered by
// (squared distance, original index) and match brute_force_knn exactly.
class KdTree {
 public:
  KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size = 16);

  std::vector<Neighbor> knn(std::span<const double> query, std::size_t k) const;

  std::size_t size() const noexcept { return index_.size(); }
  std::size_t dim() const noexcept { return dim_; }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t split_dim = 0;
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const double* query, std::size_t k, std::vector<Neighbor>& heap) const;

  std::size_t dim_;
  std::size_t leaf_size_;
  std::vector<double> points_;      // row-major, permuted into tree order
  std::vector<std::size_t> index_;  // tree slot -> original row
  std::vector<Node> nodes_;
};

}  // namespace balrisk
