#pragma once

// Closed triangulated surfaces carrying an intrinsic metric (edge lengths
// only, no embedding). Every downstream quantity -- areas, corner angles,
// cotangent weights -- is derived from the lengths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/union_find.hpp"

namespace nodal_atlas {

using Triangle = std::array<int, 3>;

/// Undirected edge, stored with a < b.
struct Edge {
  int a = 0;
  int b = 0;
};

/// Edge lengths keyed by the normalized vertex pair (min, max).
using EdgeLengths = std::map<std::pair<int, int>, double>;

inline std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

namespace detail {

inline std::uint64_t pack_edge(int a, int b) {
  auto [lo, hi] = edge_key(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) |
         static_cast<std::uint32_t>(hi);
}

// Kahan's cancellation-safe Heron formula; returns <= 0 for degenerate input.
inline double heron_area(double a, double b, double c) {
  std::array<double, 3> s{a, b, c};
  std::sort(s.begin(), s.end(), std::greater<>());
  const double x = s[0], y = s[1], z = s[2];
  const double p = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  return p <= 0.0 ? 0.0 : 0.25 * std::sqrt(p);
}

}  // namespace detail

class SurfaceMesh {
 public:
  SurfaceMesh() = default;

  /// Validates and builds a closed, connected, consistently oriented mesh.
  /// Throws Error{NonManifold, Disconnected, DegenerateTriangle,
  /// InconsistentOrientation, InvalidInput}.
  static SurfaceMesh build(int vertex_count, std::vector<Triangle> triangles, const EdgeLengths& lengths);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

  const Triangle& triangle(int t) const { return triangles_[t]; }
  std::span<const Triangle> triangles() const { return triangles_; }
  const Edge& edge(int e) const { return edges_[e]; }
  double edge_length(int e) const { return lengths_[e]; }
  double length(int a, int b) const { return lengths_[edge_id(a, b)]; }

  /// Edge between a and b, if any.
  std::optional<int> find_edge(int a, int b) const {
    auto it = edge_index_.find(detail::pack_edge(a, b));
    if (it == edge_index_.end()) return std::nullopt;
    return it->second;
  }
  int edge_id(int a, int b) const {
    auto e = find_edge(a, b);
    if (!e) throw Error(ErrorCode::InvalidInput, "no edge " + std::to_string(a) + "-" + std::to_string(b));
    return *e;
  }

  /// Edge ids of triangle t; entry k joins corners k and k+1.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  /// The two triangles sharing edge e.
  const std::array<int, 2>& edge_triangles(int e) const { return edge_triangles_[e]; }
  /// Triangle across edge e from t.
  int opposite_triangle(int t, int e) const {
    const auto& et = edge_triangles_[e];
    return et[0] == t ? et[1] : et[0];
  }
  std::span<const int> vertex_triangles(int v) const {
    return {vertex_triangles_.data() + vertex_offsets_[v],
            vertex_triangles_.data() + vertex_offsets_[v + 1]};
  }
  std::span<const int> vertex_neighbors(int v) const {
    return {vertex_neighbors_.data() + vertex_offsets_nb_[v],
            vertex_neighbors_.data() + vertex_offsets_nb_[v + 1]};
  }

  double triangle_area(int t) const { return areas_[t]; }
  double area() const { return total_area_; }

  /// Interior angle of triangle t at its corner k (law of cosines).
  double corner_angle(int t, int k) const {
    const auto& te = triangle_edges_[t];
    const double a = lengths_[te[(k + 1) % 3]];
    const double b = lengths_[te[k]];
    const double c = lengths_[te[(k + 2) % 3]];
    return std::atan2(4.0 * areas_[t], b * b + c * c - a * a);
  }
  /// Cotangent of the angle at corner k of triangle t.
  double corner_cot(int t, int k) const {
    const auto& te = triangle_edges_[t];
    const double a = lengths_[te[(k + 1) % 3]];
    const double b = lengths_[te[k]];
    const double c = lengths_[te[(k + 2) % 3]];
    return (b * b + c * c - a * a) / (4.0 * areas_[t]);
  }
  /// Corner index of vertex v in triangle t, or -1.
  int corner_of(int t, int v) const {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] == v) return k;
    return -1;
  }

  /// Sum of corner angles around v.
  double angle_sum(int v) const {
    double sum = 0.0;
    for (int t : vertex_triangles(v)) sum += corner_angle(t, corner_of(t, v));
    return sum;
  }

  int euler_characteristic() const { return vertex_count_ - edge_count() + triangle_count(); }

  /// All lengths as a normalized map (round-trips through build()).
  EdgeLengths edge_lengths() const {
    EdgeLengths out;
    for (int e = 0; e < edge_count(); ++e) out[{edges_[e].a, edges_[e].b}] = lengths_[e];
    return out;
  }

 private:
  int vertex_count_ = 0;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<double> lengths_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 2>> edge_triangles_;
  std::vector<int> vertex_offsets_;
  std::vector<int> vertex_triangles_;
  std::vector<int> vertex_offsets_nb_;
  std::vector<int> vertex_neighbors_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
};

inline SurfaceMesh SurfaceMesh::build(int vertex_count, std::vector<Triangle> triangles,
                                      const EdgeLengths& lengths) {
  if (vertex_count <= 0 || triangles.empty())
    throw Error(ErrorCode::InvalidInput, "mesh needs at least one vertex and one triangle");

  SurfaceMesh m;
  m.vertex_count_ = vertex_count;
  m.triangles_ = std::move(triangles);
  const int nt = m.triangle_count();

  // Directed half-edge occurrences per undirected edge: (triangle, forward?).
  struct Occurrence {
    int tri;
    bool forward;  // appears as lo -> hi in the triangle's cyclic order
  };
  std::vector<std::vector<Occurrence>> occurrences;
  m.triangle_edges_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= vertex_count)
        throw Error(ErrorCode::InvalidInput, "triangle " + std::to_string(t) + " has out-of-range vertex");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(t) + " repeats a vertex");
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const auto key = detail::pack_edge(a, b);
      auto [it, inserted] = m.edge_index_.try_emplace(key, m.edge_count());
      if (inserted) {
        auto [lo, hi] = edge_key(a, b);
        m.edges_.push_back({lo, hi});
        occurrences.emplace_back();
      }
      occurrences[it->second].push_back({t, a < b});
      m.triangle_edges_[t][k] = it->second;
    }
  }

  m.edge_triangles_.resize(m.edges_.size());
  for (int e = 0; e < m.edge_count(); ++e) {
    const auto& occ = occurrences[e];
    if (occ.size() != 2)
      throw Error(ErrorCode::NonManifold, "edge " + std::to_string(m.edges_[e].a) + "-" +
                                              std::to_string(m.edges_[e].b) + " lies in " +
                                              std::to_string(occ.size()) + " triangles");
    if (occ[0].forward == occ[1].forward)
      throw Error(ErrorCode::InconsistentOrientation, "edge " + std::to_string(m.edges_[e].a) + "-" +
                                                          std::to_string(m.edges_[e].b) +
                                                          " traversed twice in the same direction");
    m.edge_triangles_[e] = {occ[0].tri, occ[1].tri};
  }

  m.lengths_.resize(m.edges_.size());
  for (int e = 0; e < m.edge_count(); ++e) {
    auto it = lengths.find({m.edges_[e].a, m.edges_[e].b});
    if (it == lengths.end())
      throw Error(ErrorCode::InvalidInput, "missing length for edge " + std::to_string(m.edges_[e].a) + "-" +
                                               std::to_string(m.edges_[e].b));
    if (!(it->second > 0.0) || !std::isfinite(it->second))
      throw Error(ErrorCode::InvalidInput, "non-positive edge length");
    m.lengths_[e] = it->second;
  }

  m.areas_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& te = m.triangle_edges_[t];
    const double a = m.lengths_[te[0]], b = m.lengths_[te[1]], c = m.lengths_[te[2]];
    if (!(a < b + c && b < a + c && c < a + b))
      throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(t) + " violates the triangle inequality");
    m.areas_[t] = detail::heron_area(a, b, c);
    if (!(m.areas_[t] > 0.0))
      throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(t) + " has zero area");
    m.total_area_ += m.areas_[t];
  }

  // Vertex -> triangle CSR.
  m.vertex_offsets_.assign(vertex_count + 1, 0);
  for (const auto& tri : m.triangles_)
    for (int v : tri) ++m.vertex_offsets_[v + 1];
  for (int v = 0; v < vertex_count; ++v) {
    if (m.vertex_offsets_[v + 1] == 0)
      throw Error(ErrorCode::Disconnected, "vertex " + std::to_string(v) + " is not used by any triangle");
    m.vertex_offsets_[v + 1] += m.vertex_offsets_[v];
  }
  m.vertex_triangles_.resize(m.vertex_offsets_.back());
  {
    std::vector<int> fill(m.vertex_offsets_.begin(), m.vertex_offsets_.end() - 1);
    for (int t = 0; t < nt; ++t)
      for (int v : m.triangles_[t]) m.vertex_triangles_[fill[v]++] = t;
  }

  // Vertex -> neighbor CSR; also rejects pinched vertices (link must be one cycle,
  // i.e. #neighbors == #incident triangles and the fan is edge-connected).
  m.vertex_offsets_nb_.assign(vertex_count + 1, 0);
  std::vector<std::vector<int>> nbrs(vertex_count);
  for (const auto& e : m.edges_) {
    nbrs[e.a].push_back(e.b);
    nbrs[e.b].push_back(e.a);
  }
  for (int v = 0; v < vertex_count; ++v) {
    std::sort(nbrs[v].begin(), nbrs[v].end());
    const auto fan = m.vertex_triangles(v);
    if (nbrs[v].size() != fan.size())
      throw Error(ErrorCode::NonManifold, "vertex " + std::to_string(v) + " has a non-disk neighbourhood");
    m.vertex_offsets_nb_[v + 1] = m.vertex_offsets_nb_[v] + static_cast<int>(nbrs[v].size());
  }
  m.vertex_neighbors_.reserve(m.vertex_offsets_nb_.back());
  for (auto& nb : nbrs) m.vertex_neighbors_.insert(m.vertex_neighbors_.end(), nb.begin(), nb.end());
  for (int v = 0; v < vertex_count; ++v) {
    // The fan must be connected through edges incident to v.
    const auto fan = m.vertex_triangles(v);
    UnionFind fan_uf(static_cast<int>(fan.size()));
    for (int u : m.vertex_neighbors(v)) {
      const auto& et = m.edge_triangles_[m.edge_index_.at(detail::pack_edge(v, u))];
      const auto i0 = std::find(fan.begin(), fan.end(), et[0]) - fan.begin();
      const auto i1 = std::find(fan.begin(), fan.end(), et[1]) - fan.begin();
      fan_uf.unite(static_cast<int>(i0), static_cast<int>(i1));
    }
    for (int i = 1; i < static_cast<int>(fan.size()); ++i)
      if (fan_uf.find(i) != fan_uf.find(0))
        throw Error(ErrorCode::NonManifold, "vertex " + std::to_string(v) + " is pinched");
  }

  UnionFind uf(nt);
  for (const auto& et : m.edge_triangles_) uf.unite(et[0], et[1]);
  const int root = uf.find(0);
  for (int t = 1; t < nt; ++t)
    if (uf.find(t) != root) throw Error(ErrorCode::Disconnected, "triangle adjacency graph is disconnected");

  return m;
}

/// Free-function spelling of SurfaceMesh::build.
inline SurfaceMesh build_mesh(int vertex_count, std::vector<Triangle> triangles, const EdgeLengths& lengths) {
  return SurfaceMesh::build(vertex_count, std::move(triangles), lengths);
}

/// g = (2 - chi) / 2 for the closed orientable surface.
inline int genus(const SurfaceMesh& mesh) { return (2 - mesh.euler_characteristic()) / 2; }

}  // namespace nodal_atlas
