#pragma once

#include <numeric>
#include <vector>

namespace nodal_atlas {

/// Disjoint sets over dense integer ids with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int n = 0) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  int size() const { return static_cast<int>(parent_.size()); }

  /// Relabels roots as 0..k-1 in order of first appearance; entries with
  /// `active[i] == false` get -1. Returns the number of labels.
  int compact_labels(std::vector<int>& labels, const std::vector<bool>* active = nullptr) {
    labels.assign(parent_.size(), -1);
    std::vector<int> root_label(parent_.size(), -1);
    int next = 0;
    for (int i = 0; i < size(); ++i) {
      if (active && !(*active)[i]) continue;
      int r = find(i);
      if (root_label[r] < 0) root_label[r] = next++;
      labels[i] = root_label[r];
    }
    return next;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace nodal_atlas
