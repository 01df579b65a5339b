#pragma once

// Orientation-reversing isometric involutions realized as vertex
// permutations, their fixed-point curves, and the separation test.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/union_find.hpp"

namespace nodal_atlas {

/// A certified orientation-reversing, isometric, simplicial involution.
/// Only validate_involution() constructs one.
class Involution {
 public:
  Involution() = default;

  int operator()(int v) const { return vertex_map_[v]; }
  std::span<const int> vertex_map() const { return vertex_map_; }
  bool fixes(int v) const { return vertex_map_[v] == v; }
  int triangle_image(int t) const { return triangle_map_[t]; }
  std::span<const int> triangle_map() const { return triangle_map_; }
  int edge_image(int e) const { return edge_map_[e]; }

  /// (sigma^* v)_i = v_{sigma(i)}.
  template <class Vec>
  Vec pull_back(const Vec& v) const {
    Vec out(v.size());
    for (int i = 0; i < static_cast<int>(vertex_map_.size()); ++i) out[i] = v[vertex_map_[i]];
    return out;
  }

 private:
  friend Involution validate_involution(const SurfaceMesh& mesh, std::vector<int> perm);
  std::vector<int> vertex_map_;
  std::vector<int> triangle_map_;
  std::vector<int> edge_map_;
};

namespace detail {

inline std::map<Triangle, int> triangle_lookup(const SurfaceMesh& mesh) {
  std::map<Triangle, int> out;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    Triangle key = mesh.triangle(t);
    std::sort(key.begin(), key.end());
    out.emplace(key, t);
  }
  return out;
}

// +1 if (x, y, z) is a cyclic rotation of tri, -1 if of its reverse.
inline int cyclic_orientation(const Triangle& tri, int x, int y, int z) {
  for (int k = 0; k < 3; ++k) {
    if (tri[k] != x) continue;
    if (tri[(k + 1) % 3] == y && tri[(k + 2) % 3] == z) return 1;
    if (tri[(k + 2) % 3] == y && tri[(k + 1) % 3] == z) return -1;
  }
  return 0;
}

}  // namespace detail

/// Certifies `perm` as an orientation-reversing isometric involution of `mesh`.
/// Throws Error{InvalidInput, NotInvolutive, NotSimplicial, NotIsometric,
/// OrientationPreserving}.
inline Involution validate_involution(const SurfaceMesh& mesh, std::vector<int> perm) {
  const int nv = mesh.vertex_count();
  if (static_cast<int>(perm.size()) != nv)
    throw Error(ErrorCode::InvalidInput, "permutation has " + std::to_string(perm.size()) + " entries, mesh has " +
                                             std::to_string(nv) + " vertices");
  {
    std::vector<bool> hit(nv, false);
    for (int p : perm) {
      if (p < 0 || p >= nv || hit[p]) throw Error(ErrorCode::InvalidInput, "not a permutation of the vertex indices");
      hit[p] = true;
    }
  }
  for (int v = 0; v < nv; ++v)
    if (perm[perm[v]] != v)
      throw Error(ErrorCode::NotInvolutive, "sigma(sigma(" + std::to_string(v) + ")) != " + std::to_string(v));

  Involution inv;
  inv.vertex_map_ = std::move(perm);
  const auto& s = inv.vertex_map_;

  const auto lookup = detail::triangle_lookup(mesh);
  inv.triangle_map_.resize(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    Triangle key{s[tri[0]], s[tri[1]], s[tri[2]]};
    std::sort(key.begin(), key.end());
    auto it = lookup.find(key);
    if (it == lookup.end())
      throw Error(ErrorCode::NotSimplicial, "image of triangle " + std::to_string(t) + " is not a triangle");
    inv.triangle_map_[t] = it->second;
  }

  inv.edge_map_.resize(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& ed = mesh.edge(e);
    const int image = mesh.edge_id(s[ed.a], s[ed.b]);
    const double l0 = mesh.edge_length(e), l1 = mesh.edge_length(image);
    if (std::abs(l0 - l1) > 1e-12 * std::max(l0, l1))
      throw Error(ErrorCode::NotIsometric, "edge " + std::to_string(ed.a) + "-" + std::to_string(ed.b) +
                                               " changes length under sigma");
    inv.edge_map_[e] = image;
  }

  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    const int o = detail::cyclic_orientation(mesh.triangle(inv.triangle_map_[t]), s[tri[0]], s[tri[1]], s[tri[2]]);
    if (o > 0)
      throw Error(ErrorCode::OrientationPreserving,
                  "triangle " + std::to_string(t) + " keeps its cyclic order under sigma");
  }
  return inv;
}

/// Fixed-point set of an involution as closed edge loops.
struct FixedCurve {
  /// Each component is a cyclic vertex list; consecutive entries (and last->first) share an edge.
  std::vector<std::vector<int>> components;
  /// arc_lengths[c][i] is the length of edge (components[c][i], components[c][i+1 mod size]).
  std::vector<std::vector<double>> arc_lengths;
  bool separating = false;

  int component_count() const { return static_cast<int>(components.size()); }
  double length(int c) const {
    return std::accumulate(arc_lengths[c].begin(), arc_lengths[c].end(), 0.0);
  }
  double total_length() const {
    double sum = 0.0;
    for (int c = 0; c < component_count(); ++c) sum += length(c);
    return sum;
  }
};

/// Builds a FixedCurve from explicit vertex loops (no separation test).
inline FixedCurve make_fixed_curve(const SurfaceMesh& mesh, std::vector<std::vector<int>> loops) {
  FixedCurve curve;
  curve.components = std::move(loops);
  for (const auto& loop : curve.components) {
    std::vector<double> arcs;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      auto e = mesh.find_edge(loop[i], loop[(i + 1) % loop.size()]);
      if (!e) throw Error(ErrorCode::NotAPath, "loop vertices are not joined by a mesh edge");
      arcs.push_back(mesh.edge_length(*e));
    }
    curve.arc_lengths.push_back(std::move(arcs));
  }
  return curve;
}

/// True iff cutting the triangle adjacency graph along every curve edge leaves
/// at least two pieces, and (when `inv` is given) no piece is mapped to itself.
inline bool is_separating(const SurfaceMesh& mesh, const FixedCurve& curve, const Involution* inv = nullptr) {
  std::vector<bool> cut(mesh.edge_count(), false);
  for (const auto& loop : curve.components)
    for (std::size_t i = 0; i < loop.size(); ++i) cut[mesh.edge_id(loop[i], loop[(i + 1) % loop.size()])] = true;

  UnionFind uf(mesh.triangle_count());
  for (int e = 0; e < mesh.edge_count(); ++e)
    if (!cut[e]) uf.unite(mesh.edge_triangles(e)[0], mesh.edge_triangles(e)[1]);
  std::vector<int> label;
  const int pieces = uf.compact_labels(label);
  if (pieces < 2) return false;
  if (inv) {
    for (int t = 0; t < mesh.triangle_count(); ++t)
      if (label[inv->triangle_image(t)] == label[t]) return false;
  }
  return true;
}

/// Organizes the fixed vertices of `inv` into simple closed loops along fixed
/// edges. Components are canonical: each starts at its smallest vertex and
/// heads toward the smaller of its two loop neighbours; components are sorted
/// by starting vertex. Throws Error{FixedSetNotCurve}.
inline FixedCurve fixed_point_set(const SurfaceMesh& mesh, const Involution& inv) {
  const int nv = mesh.vertex_count();
  std::vector<std::vector<int>> fixed_nbrs(nv);
  std::vector<int> fixed;
  for (int v = 0; v < nv; ++v) {
    if (!inv.fixes(v)) continue;
    fixed.push_back(v);
    for (int u : mesh.vertex_neighbors(v))
      if (inv.fixes(u)) fixed_nbrs[v].push_back(u);
  }
  for (int v : fixed) {
    if (fixed_nbrs[v].size() != 2)
      throw Error(ErrorCode::FixedSetNotCurve, "fixed vertex " + std::to_string(v) + " has " +
                                                   std::to_string(fixed_nbrs[v].size()) +
                                                   " fixed neighbours (expected 2)");
  }

  std::vector<bool> visited(nv, false);
  std::vector<std::vector<int>> loops;
  for (int start : fixed) {  // ascending, so each loop starts at its minimum
    if (visited[start]) continue;
    std::vector<int> loop{start};
    visited[start] = true;
    int prev = start;
    int cur = std::min(fixed_nbrs[start][0], fixed_nbrs[start][1]);
    while (cur != start) {
      if (visited[cur]) throw Error(ErrorCode::FixedSetNotCurve, "fixed edges do not form disjoint simple loops");
      visited[cur] = true;
      loop.push_back(cur);
      const int next = fixed_nbrs[cur][0] == prev ? fixed_nbrs[cur][1] : fixed_nbrs[cur][0];
      prev = cur;
      cur = next;
    }
    if (loop.size() < 3) throw Error(ErrorCode::FixedSetNotCurve, "degenerate fixed loop");
    loops.push_back(std::move(loop));
  }

  FixedCurve curve = make_fixed_curve(mesh, std::move(loops));
  curve.separating = !curve.components.empty() && is_separating(mesh, curve, &inv);
  return curve;
}

}  // namespace nodal_atlas
