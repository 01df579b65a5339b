#pragma once

// Nodal sets of piecewise-linear eigenfunctions, nodal domains, singular
// points on the fixed curve, and the nodal graph with its Euler and
// domain-count bounds.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/restriction.hpp"
#include "nodal_atlas/spectral.hpp"
#include "nodal_atlas/union_find.hpp"

namespace nodal_atlas {

/// Default vertex-zero tolerance relative to the sup norm.
inline constexpr double kZeroTolRel = 1e-6;

/// A node of the nodal set: a zero vertex, or a sign flip inside an edge at
/// fraction t from edge(e).a to edge(e).b.
struct NodalPoint {
  int vertex = -1;
  int edge = -1;
  double t = 0.0;
};

/// Segment between two nodal points; `triangle` hosts it (for a zero edge, the
/// lower-numbered adjacent triangle).
struct NodalSegment {
  int a = 0, b = 0;
  int triangle = -1;
  double length = 0.0;
};

struct NodalSet {
  Parity parity = Parity::none;
  double zero_tol = 0.0;
  int perturbed_vertices = 0;   // vertex values nudged off zero
  std::vector<double> values;   // perturbed vertex values used for all topology
  std::vector<NodalPoint> points;
  std::vector<NodalSegment> segments;
  std::vector<int> edge_point;    // edge -> point id or -1
  std::vector<int> vertex_point;  // vertex -> point id or -1
  double total_length = 0.0;

  bool empty() const { return segments.empty(); }
};

namespace detail {

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

// Planar layout of triangle t: corner 0 at the origin, corner 1 on the x axis.
inline std::array<std::array<double, 2>, 3> triangle_layout(const SurfaceMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  const double c = mesh.length(tri[0], tri[1]), b = mesh.length(tri[0], tri[2]);
  const double theta = mesh.corner_angle(t, 0);
  return {{{0.0, 0.0}, {c, 0.0}, {b * std::cos(theta), b * std::sin(theta)}}};
}

inline std::array<double, 3> barycentric_of(const SurfaceMesh& mesh, int t, const NodalPoint& p) {
  std::array<double, 3> w{0.0, 0.0, 0.0};
  if (p.vertex >= 0) {
    w[mesh.corner_of(t, p.vertex)] = 1.0;
  } else {
    const auto& ed = mesh.edge(p.edge);
    w[mesh.corner_of(t, ed.a)] = 1.0 - p.t;
    w[mesh.corner_of(t, ed.b)] = p.t;
  }
  return w;
}

inline double segment_length(const SurfaceMesh& mesh, int t, const NodalPoint& p, const NodalPoint& q) {
  const auto layout = triangle_layout(mesh, t);
  const auto wp = barycentric_of(mesh, t, p), wq = barycentric_of(mesh, t, q);
  double dx = 0.0, dy = 0.0;
  for (int k = 0; k < 3; ++k) {
    dx += (wp[k] - wq[k]) * layout[k][0];
    dy += (wp[k] - wq[k]) * layout[k][1];
  }
  return std::hypot(dx, dy);
}

}  // namespace detail

/// Vertex values after symbolic perturbation. Even or untagged pairs: every
/// |v| < tol becomes +tol. Odd pairs: exact zeros (the fixed vertices) stay
/// zero and other small values become copysign(tol, v), keeping sigma^* v = -v.
inline std::vector<double> perturbed_values(const EigenPair& pair, double tol, int* nudged = nullptr) {
  std::vector<double> out(pair.coefficients.data(), pair.coefficients.data() + pair.coefficients.size());
  int count = 0;
  for (double& x : out) {
    if (pair.parity == Parity::odd) {
      if (x != 0.0 && std::abs(x) < tol) {
        x = std::copysign(tol, x);
        ++count;
      } else if (x == 0.0) {
        x = 0.0;  // normalize -0.0
      }
    } else if (std::abs(x) < tol) {
      x = tol;
      ++count;
    }
  }
  if (nudged) *nudged = count;
  return out;
}

inline double default_zero_tol(const EigenPair& pair) { return kZeroTolRel * sup_norm(pair); }

/// Zero set of the piecewise-linear interpolant of the (perturbed) pair.
/// vertex_zero_tol < 0 selects the default 1e-6 * sup_norm.
inline NodalSet extract_nodal_set(const EigenPair& pair, const SurfaceMesh& mesh, double vertex_zero_tol = -1.0) {
  if (pair.coefficients.size() != mesh.vertex_count())
    throw Error(ErrorCode::InvalidInput, "eigenvector size does not match the mesh");
  NodalSet ns;
  ns.parity = pair.parity;
  ns.zero_tol = vertex_zero_tol >= 0.0 ? vertex_zero_tol : default_zero_tol(pair);
  ns.values = perturbed_values(pair, ns.zero_tol, &ns.perturbed_vertices);
  const auto& val = ns.values;

  ns.vertex_point.assign(mesh.vertex_count(), -1);
  ns.edge_point.assign(mesh.edge_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (val[v] != 0.0) continue;
    ns.vertex_point[v] = static_cast<int>(ns.points.size());
    ns.points.push_back({v, -1, 0.0});
  }
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& ed = mesh.edge(e);
    const double a = val[ed.a], b = val[ed.b];
    if (detail::sign_of(a) * detail::sign_of(b) >= 0) continue;
    ns.edge_point[e] = static_cast<int>(ns.points.size());
    ns.points.push_back({-1, e, a / (a - b)});
  }

  auto add = [&](int p, int q, int t) {
    const double len = detail::segment_length(mesh, t, ns.points[p], ns.points[q]);
    ns.segments.push_back({p, q, t, len});
    ns.total_length += len;
  };
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    const auto& te = mesh.triangle_edges(t);  // te[k] joins corners k and k+1
    int zeros = 0, zero_corner = -1;
    for (int k = 0; k < 3; ++k)
      if (val[tri[k]] == 0.0) {
        ++zeros;
        zero_corner = k;
      }
    if (zeros == 0) {
      std::vector<int> crossed;
      for (int k = 0; k < 3; ++k)
        if (ns.edge_point[te[k]] >= 0) crossed.push_back(ns.edge_point[te[k]]);
      if (crossed.size() == 2) add(crossed[0], crossed[1], t);
    } else if (zeros == 1) {
      const int far_edge = te[(zero_corner + 1) % 3];
      if (ns.edge_point[far_edge] >= 0) add(ns.vertex_point[tri[zero_corner]], ns.edge_point[far_edge], t);
    }
  }
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& ed = mesh.edge(e);
    if (val[ed.a] != 0.0 || val[ed.b] != 0.0) continue;
    const auto& et = mesh.edge_triangles(e);
    const int host = std::min(et[0], et[1]);
    ns.segments.push_back({ns.vertex_point[ed.a], ns.vertex_point[ed.b], host, mesh.edge_length(e)});
    ns.total_length += mesh.edge_length(e);
  }
  return ns;
}

/// CSV rows: triangle,a0,a1,a2,b0,b1,b2 (barycentric endpoints per segment).
inline void write_nodal_set_csv(std::ostream& os, const SurfaceMesh& mesh, const NodalSet& ns) {
  os << "triangle,a0,a1,a2,b0,b1,b2\n";
  os.precision(17);
  for (const auto& seg : ns.segments) {
    const auto wa = detail::barycentric_of(mesh, seg.triangle, ns.points[seg.a]);
    const auto wb = detail::barycentric_of(mesh, seg.triangle, ns.points[seg.b]);
    os << seg.triangle << ',' << wa[0] << ',' << wa[1] << ',' << wa[2] << ',' << wb[0] << ',' << wb[1] << ','
       << wb[2] << '\n';
  }
}

namespace detail {

// Connected pieces (triangle, sign) of the complement of the zero set, with
// optional extra edges that may not be crossed. Piece id = 2 t + (sign > 0).
inline int complement_pieces(const SurfaceMesh& mesh, const std::vector<double>& val,
                             const std::vector<bool>* blocked, std::vector<int>& labels) {
  const int nt = mesh.triangle_count();
  std::vector<bool> active(2 * nt, false);
  for (int t = 0; t < nt; ++t)
    for (int v : mesh.triangle(t)) {
      if (val[v] > 0.0) active[2 * t + 1] = true;
      if (val[v] < 0.0) active[2 * t] = true;
    }
  UnionFind uf(2 * nt);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    if (blocked && (*blocked)[e]) continue;
    const auto& ed = mesh.edge(e);
    const auto& et = mesh.edge_triangles(e);
    if (val[ed.a] > 0.0 || val[ed.b] > 0.0) uf.unite(2 * et[0] + 1, 2 * et[1] + 1);
    if (val[ed.a] < 0.0 || val[ed.b] < 0.0) uf.unite(2 * et[0], 2 * et[1]);
  }
  return uf.compact_labels(labels, &active);
}

}  // namespace detail

struct NodalDomains {
  Parity parity = Parity::none;
  int count = 0;                    // N
  std::vector<int> piece_domain;    // 2 t + (sign > 0) -> domain id or -1
  std::vector<int> domain_sign;     // +1 / -1
  std::vector<int> domain_pieces;   // pieces per domain
  bool tagged = false;              // inert/split computed
  std::vector<bool> inert;          // per domain (even pairs with an involution)
  std::vector<int> partner;         // domain containing the sigma image
  int inert_count = 0, split_count = 0;

  /// Domain holding the part of triangle t where the function has sign `sign`, or -1.
  int domain_of(int t, int sign) const { return piece_domain[2 * t + (sign > 0 ? 1 : 0)]; }
};

/// Nodal domains by union-find over (triangle, sign) pieces. With an
/// involution, each domain records the domain of its sigma image; even pairs
/// are additionally tagged inert (self-mapped) or split.
inline NodalDomains count_nodal_domains(const EigenPair& pair, const SurfaceMesh& mesh,
                                        const Involution* inv = nullptr, double vertex_zero_tol = -1.0) {
  const double tol = vertex_zero_tol >= 0.0 ? vertex_zero_tol : default_zero_tol(pair);
  const auto val = perturbed_values(pair, tol);
  NodalDomains nd;
  nd.parity = pair.parity;
  nd.count = detail::complement_pieces(mesh, val, nullptr, nd.piece_domain);
  nd.domain_sign.assign(nd.count, 0);
  nd.domain_pieces.assign(nd.count, 0);
  for (std::size_t p = 0; p < nd.piece_domain.size(); ++p) {
    const int d = nd.piece_domain[p];
    if (d < 0) continue;
    nd.domain_sign[d] = (p % 2 == 1) ? 1 : -1;
    ++nd.domain_pieces[d];
  }
  if (inv) {
    nd.partner.assign(nd.count, -1);
    for (int t = 0; t < mesh.triangle_count(); ++t)
      for (int s : {0, 1}) {
        const int d = nd.piece_domain[2 * t + s];
        if (d < 0) continue;
        // sigma preserves signs of even functions and swaps those of odd ones.
        const int image_sign = pair.parity == Parity::odd ? 1 - s : s;
        const int image = nd.piece_domain[2 * inv->triangle_image(t) + image_sign];
        if (nd.partner[d] < 0) nd.partner[d] = image;
      }
    if (pair.parity == Parity::even) {
      nd.tagged = true;
      nd.inert.assign(nd.count, false);
      for (int d = 0; d < nd.count; ++d) {
        nd.inert[d] = nd.partner[d] == d;
        (nd.inert[d] ? nd.inert_count : nd.split_count)++;
      }
    }
  }
  return nd;
}

/// Arc-length positions along an odd pair's fixed path where the normalized
/// Neumann trace changes sign. zero_tol < 0 selects 1e-6 * sup_norm.
/// Throws Error{WrongParity} unless the pair is odd.
inline std::vector<double> detect_singular_points(const SurfaceMesh& mesh, const EigenPair& pair,
                                                  const CurvePath& path, double zero_tol = -1.0) {
  if (pair.parity != Parity::odd) throw Error(ErrorCode::WrongParity, "singular points need an odd eigenpair");
  const auto trace = restrict(mesh, pair, path, TraceKind::neumann_normalized);
  const double tol = zero_tol >= 0.0 ? zero_tol : default_zero_tol(pair);
  try {
    return count_sign_changes(trace, tol).positions;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllAmbiguous) return {};
    throw;
  }
}

enum class GraphVertexRole { loop_marker, gamma_intersection, singular, junction };

struct NodalGraph {
  Parity parity = Parity::none;
  int v = 0, e = 0, f = 0, m = 0;
  int n = 0;  // gamma intersections (even) or singular points (odd)
  int loop_markers = 0;
  std::vector<GraphVertexRole> roles;  // one per graph vertex
  std::vector<int> degrees;            // one per graph vertex (markers have degree 2)
  int min_special_degree = 0;          // smallest degree among gamma_intersection / singular vertices
  int trace_singular_points = 0;       // odd: sign changes of the Neumann trace, for comparison with n
  int perturbed_vertices = 0;

  int euler_value() const { return v - e + f - m; }
  int degree_sum() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
  }
};

/// The nodal graph on Z (odd pairs, where the fixed path lies in Z) or on
/// Z + path (even pairs): essential nodes of degree != 2, one marker per
/// vertex-free cycle, edges = chains between them, faces = components of the
/// complement, m = connected components. Throws Error{WrongParity} for untagged pairs.
inline NodalGraph build_nodal_graph(const EigenPair& pair, const SurfaceMesh& mesh, const CurvePath& path,
                                    double vertex_zero_tol = -1.0) {
  if (pair.parity == Parity::none) throw Error(ErrorCode::WrongParity, "nodal graph needs an even or odd eigenpair");
  const NodalSet ns = extract_nodal_set(pair, mesh, vertex_zero_tol);
  const auto& val = ns.values;
  const bool even = pair.parity == Parity::even;
  const int np = static_cast<int>(ns.points.size());
  const int len = path.size();

  std::vector<std::pair<int, int>> segs;
  for (const auto& s : ns.segments) segs.emplace_back(s.a, s.b);
  int nodes = np;
  std::vector<bool> special;
  std::vector<bool> blocked(mesh.edge_count(), false);
  NodalGraph g;
  g.parity = pair.parity;
  g.perturbed_vertices = ns.perturbed_vertices;

  if (even) {
    // Path vertices become nodes; path edges are split at sign flips.
    nodes = np + len;
    special.assign(nodes, false);
    for (int i = 0; i < len; ++i) {
      const int a = path.vertices[i], b = path.vertices[(i + 1) % len];
      const int e = mesh.edge_id(a, b);
      blocked[e] = true;
      const int x = ns.edge_point[e];
      if (x >= 0) {
        segs.emplace_back(np + i, x);
        segs.emplace_back(x, np + (i + 1) % len);
        special[x] = true;
        ++g.n;
      } else {
        segs.emplace_back(np + i, np + (i + 1) % len);
      }
    }
  } else {
    for (int v : path.vertices)
      if (val[v] != 0.0) throw Error(ErrorCode::PathNotFixed, "odd pair does not vanish on the path");
    special.assign(nodes, false);
    for (int i = 0; i < len; ++i) {
      const int v = path.vertices[i];
      bool branch = false;
      for (int t : path.normal_fan(i)) {
        const auto& tri = mesh.triangle(t);
        const int k = mesh.corner_of(t, v);
        const double a = val[tri[(k + 1) % 3]], b = val[tri[(k + 2) % 3]];
        if (a * b < 0.0) branch = true;
      }
      if (branch) {
        special[ns.vertex_point[v]] = true;
        ++g.n;
      }
    }
    const auto sp = detect_singular_points(mesh, pair, path, vertex_zero_tol);
    g.trace_singular_points = static_cast<int>(sp.size());
  }

  std::vector<int> degree(nodes, 0);
  UnionFind uf(nodes);
  for (auto [a, b] : segs) {
    ++degree[a];
    ++degree[b];
    uf.unite(a, b);
  }
  std::vector<bool> used(nodes);
  for (int i = 0; i < nodes; ++i) used[i] = degree[i] > 0;
  std::vector<int> comp;
  g.m = uf.compact_labels(comp, &used);
  std::vector<bool> has_essential(g.m, false);
  for (int i = 0; i < nodes; ++i)
    if (used[i] && degree[i] != 2) has_essential[comp[i]] = true;

  g.min_special_degree = 0;
  bool first_special = true;
  int half_degree_sum = 0;
  for (int i = 0; i < nodes; ++i) {
    if (!used[i] || degree[i] == 2) {
      if (used[i] && special[i]) {
        // A special node of degree 2 is still a graph vertex (and a flagged defect).
        g.roles.push_back(even ? GraphVertexRole::gamma_intersection : GraphVertexRole::singular);
        g.degrees.push_back(2);
        half_degree_sum += 2;
        has_essential[comp[i]] = true;
        if (first_special || 2 < g.min_special_degree) g.min_special_degree = 2;
        first_special = false;
      }
      continue;
    }
    half_degree_sum += degree[i];
    g.degrees.push_back(degree[i]);
    if (special[i]) {
      g.roles.push_back(even ? GraphVertexRole::gamma_intersection : GraphVertexRole::singular);
      if (first_special || degree[i] < g.min_special_degree) g.min_special_degree = degree[i];
      first_special = false;
    } else {
      g.roles.push_back(GraphVertexRole::junction);
    }
  }
  for (int c = 0; c < g.m; ++c)
    if (!has_essential[c]) {
      ++g.loop_markers;
      g.roles.push_back(GraphVertexRole::loop_marker);
      g.degrees.push_back(2);
      half_degree_sum += 2;
    }
  g.v = static_cast<int>(g.roles.size());
  g.e = half_degree_sum / 2;

  std::vector<int> labels;
  g.f = detail::complement_pieces(mesh, val, even ? &blocked : nullptr, labels);
  return g;
}

/// v - e + f - m >= 1 - 2g.
inline bool euler_check(const NodalGraph& graph, int genus_value) {
  return graph.euler_value() >= 1 - 2 * genus_value;
}

struct DomainBound {
  int bound = 0;
  bool holds = false;
};

/// Odd: N >= n + 2 - 2g. Even: N >= n/2 + 1 - g. Throws Error{InconsistentInputs}.
inline DomainBound lemma1_bounds(const NodalDomains& domains, const NodalGraph& graph, int genus_value) {
  if (domains.parity != graph.parity || graph.parity == Parity::none)
    throw Error(ErrorCode::InconsistentInputs, "domains and graph come from pairs of different parity");
  DomainBound out;
  out.bound = graph.parity == Parity::odd ? graph.n + 2 - 2 * genus_value : graph.n / 2 + 1 - genus_value;
  out.holds = domains.count >= out.bound;
  return out;
}

}  // namespace nodal_atlas
