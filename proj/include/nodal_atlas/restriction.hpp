#pragma once

// Restriction of eigenfunctions to closed edge paths: Dirichlet and
// normalized Neumann traces, arc-length quadratures and sign changes.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/spectral.hpp"

namespace nodal_atlas {

/// Closed simple loop along mesh edges with its two triangle fans per vertex.
struct CurvePath {
  std::vector<int> vertices;
  std::vector<double> s;             // arc length at each vertex, s[0] = 0
  std::vector<double> edge_lengths;  // edge i joins vertices[i] and vertices[i+1 mod n]
  double length = 0.0;
  /// Triangles around vertices[i] left/right of the travel direction, each in
  /// counterclockwise order around the vertex.
  std::vector<std::vector<int>> left_fans, right_fans;
  bool normal_on_left = true;

  int size() const { return static_cast<int>(vertices.size()); }
  const std::vector<int>& normal_fan(int i) const { return normal_on_left ? left_fans[i] : right_fans[i]; }
  const std::vector<int>& other_fan(int i) const { return normal_on_left ? right_fans[i] : left_fans[i]; }

  CurvePath with_flipped_normal() const {
    CurvePath out = *this;
    out.normal_on_left = !normal_on_left;
    return out;
  }
};

namespace detail {

// Triangle in which the directed edge a -> b appears in cyclic order.
inline int triangle_with_directed_edge(const SurfaceMesh& mesh, int a, int b) {
  for (int t : mesh.edge_triangles(mesh.edge_id(a, b))) {
    const auto& tri = mesh.triangle(t);
    const int k = mesh.corner_of(t, a);
    if (tri[(k + 1) % 3] == b) return t;
  }
  throw Error(ErrorCode::InvalidInput, "directed edge not found");
}

// Counterclockwise fan around v from edge (v, from) to edge (v, to).
inline std::vector<int> ccw_fan(const SurfaceMesh& mesh, int v, int from, int to) {
  std::vector<int> fan;
  int t = triangle_with_directed_edge(mesh, v, from);
  for (std::size_t guard = 0; guard <= mesh.vertex_triangles(v).size(); ++guard) {
    fan.push_back(t);
    const auto& tri = mesh.triangle(t);
    const int far = tri[(mesh.corner_of(t, v) + 2) % 3];
    if (far == to) return fan;
    t = mesh.opposite_triangle(t, mesh.edge_id(v, far));
  }
  throw Error(ErrorCode::InvalidInput, "vertex fan does not close");
}

inline Triangle sorted_triangle(const SurfaceMesh& mesh, int t) {
  Triangle key = mesh.triangle(t);
  std::sort(key.begin(), key.end());
  return key;
}

}  // namespace detail

/// Validates a cyclic vertex list (an optional repeated first vertex at the
/// end is dropped). Throws Error{NotAPath, NotClosed, SelfIntersecting}.
inline CurvePath make_path(const SurfaceMesh& mesh, std::vector<int> vertices) {
  if (vertices.size() >= 2 && vertices.front() == vertices.back()) vertices.pop_back();
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw Error(ErrorCode::NotAPath, "a closed path needs at least 3 distinct vertices");
  for (int v : vertices)
    if (v < 0 || v >= mesh.vertex_count())
      throw Error(ErrorCode::NotAPath, "vertex " + std::to_string(v) + " out of range");
  for (int i = 0; i + 1 < n; ++i)
    if (!mesh.find_edge(vertices[i], vertices[i + 1]))
      throw Error(ErrorCode::NotAPath, std::to_string(vertices[i]) + "-" + std::to_string(vertices[i + 1]) +
                                           " is not a mesh edge");
  if (!mesh.find_edge(vertices.back(), vertices.front()))
    throw Error(ErrorCode::NotClosed, "last vertex is not joined to the first");
  {
    std::unordered_set<int> seen;
    for (int v : vertices)
      if (!seen.insert(v).second)
        throw Error(ErrorCode::SelfIntersecting, "vertex " + std::to_string(v) + " visited twice");
  }

  CurvePath path;
  path.vertices = std::move(vertices);
  path.s.resize(n);
  path.edge_lengths.resize(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    path.s[i] = acc;
    path.edge_lengths[i] = mesh.length(path.vertices[i], path.vertices[(i + 1) % n]);
    acc += path.edge_lengths[i];
  }
  path.length = acc;

  path.left_fans.resize(n);
  path.right_fans.resize(n);
  for (int i = 0; i < n; ++i) {
    const int v = path.vertices[i], prev = path.vertices[(i + n - 1) % n], next = path.vertices[(i + 1) % n];
    path.left_fans[i] = detail::ccw_fan(mesh, v, next, prev);
    path.right_fans[i] = detail::ccw_fan(mesh, v, prev, next);
  }

  // Normal side: the side holding the lexicographically smallest triangle
  // incident to a path edge. Geometric, hence independent of traversal direction.
  Triangle best{};
  bool have = false;
  for (int i = 0; i < n; ++i) {
    const int a = path.vertices[i], b = path.vertices[(i + 1) % n];
    const int left = detail::triangle_with_directed_edge(mesh, a, b);
    const int right = detail::triangle_with_directed_edge(mesh, b, a);
    for (auto [t, is_left] : {std::pair{left, true}, std::pair{right, false}}) {
      const Triangle key = detail::sorted_triangle(mesh, t);
      if (!have || key < best) {
        best = key;
        path.normal_on_left = is_left;
        have = true;
      }
    }
  }
  return path;
}

/// Reverses the traversal direction, keeping s[0] at the same vertex.
inline CurvePath reversed(const SurfaceMesh& mesh, const CurvePath& path) {
  std::vector<int> verts{path.vertices.front()};
  verts.insert(verts.end(), path.vertices.rbegin(), path.vertices.rend() - 1);
  return make_path(mesh, std::move(verts));
}

enum class TraceKind { dirichlet, neumann_normalized };

inline const char* to_string(TraceKind k) { return k == TraceKind::dirichlet ? "dirichlet" : "neumann_normalized"; }

struct CurveTrace {
  TraceKind kind = TraceKind::dirichlet;
  std::vector<double> samples;       // one per path vertex
  std::vector<double> s;             // arc length per sample
  std::vector<double> edge_lengths;  // sample i to i+1 (cyclic)
  double length = 0.0;
  int eigen_index = 0;
  double eigenvalue = 0.0;

  int size() const { return static_cast<int>(samples.size()); }
};

namespace detail {

// Derivative of the piecewise-linear interpolant at fan apex v, in the
// direction bisecting the unfolded fan; per-triangle gradients weighted by
// their corner angle at v.
inline double fan_bisector_derivative(const SurfaceMesh& mesh, const std::vector<int>& fan, int v,
                                      const Eigen::VectorXd& phi) {
  double total = 0.0;
  for (int t : fan) total += mesh.corner_angle(t, mesh.corner_of(t, v));
  const double nx = std::cos(0.5 * total), ny = std::sin(0.5 * total);
  double alpha = 0.0, acc = 0.0;
  for (int t : fan) {
    const auto& tri = mesh.triangle(t);
    const int k = mesh.corner_of(t, v);
    const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
    const double theta = mesh.corner_angle(t, k);
    const double la = mesh.length(v, a), lb = mesh.length(v, b);
    const double ax = la * std::cos(alpha), ay = la * std::sin(alpha);
    const double bx = lb * std::cos(alpha + theta), by = lb * std::sin(alpha + theta);
    const double da = phi[a] - phi[v], db = phi[b] - phi[v];
    const double det = ax * by - ay * bx;
    const double gx = (da * by - ay * db) / det, gy = (ax * db - da * bx) / det;
    acc += theta * (gx * nx + gy * ny);
    alpha += theta;
  }
  return acc / total;
}

}  // namespace detail

/// Normal derivative of the interpolant at path vertex i towards normal_side:
/// half the difference of the two fan-bisector derivatives.
inline double normal_derivative(const SurfaceMesh& mesh, const CurvePath& path, int i, const Eigen::VectorXd& phi) {
  const int v = path.vertices[i];
  return 0.5 * (detail::fan_bisector_derivative(mesh, path.normal_fan(i), v, phi) -
                detail::fan_bisector_derivative(mesh, path.other_fan(i), v, phi));
}

/// Dirichlet samples, or lambda^{-1/2} times the normal derivative.
/// Throws Error{ZeroEigenvalue} for a Neumann trace of a zero eigenvalue.
inline CurveTrace restrict(const SurfaceMesh& mesh, const EigenPair& pair, const CurvePath& path, TraceKind kind) {
  if (pair.coefficients.size() != mesh.vertex_count())
    throw Error(ErrorCode::InvalidInput, "eigenvector size does not match the mesh");
  CurveTrace trace;
  trace.kind = kind;
  trace.s = path.s;
  trace.edge_lengths = path.edge_lengths;
  trace.length = path.length;
  trace.eigen_index = pair.index;
  trace.eigenvalue = pair.eigenvalue;
  trace.samples.resize(path.size());
  if (kind == TraceKind::dirichlet) {
    for (int i = 0; i < path.size(); ++i) trace.samples[i] = pair.coefficients[path.vertices[i]];
    return trace;
  }
  if (!(pair.eigenvalue > 0.0)) throw Error(ErrorCode::ZeroEigenvalue, "Neumann trace needs a positive eigenvalue");
  const double scale = 1.0 / std::sqrt(pair.eigenvalue);
  for (int i = 0; i < path.size(); ++i) trace.samples[i] = scale * normal_derivative(mesh, path, i, pair.coefficients);
  return trace;
}

/// Trapezoidal quadrature of f * trace around the loop. Throws Error{LengthMismatch}.
inline double period_integral(const CurveTrace& trace, const std::vector<double>& f) {
  const int n = trace.size();
  if (static_cast<int>(f.size()) != n)
    throw Error(ErrorCode::LengthMismatch,
                "weight has " + std::to_string(f.size()) + " samples, trace has " + std::to_string(n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    sum += 0.5 * trace.edge_lengths[i] * (f[i] * trace.samples[i] + f[j] * trace.samples[j]);
  }
  return sum;
}

/// Trapezoidal quadrature of trace^2 over [s_start, s_end], endpoints snapped
/// to the nearest path vertices (the squared L2 norm on that arc).
/// Throws Error{EmptySegment} when both ends snap to the same vertex.
inline double l2_norm_on_segment(const CurveTrace& trace, double s_start, double s_end) {
  if (!(s_start >= 0.0 && s_start < s_end && s_end <= trace.length * (1.0 + 1e-12)))
    throw Error(ErrorCode::InvalidInput, "segment must satisfy 0 <= s_start < s_end <= length");
  const int n = trace.size();
  auto nearest = [&](double pos) {
    int best = 0;
    double dist = std::abs(pos);
    for (int i = 1; i <= n; ++i) {
      const double si = i < n ? trace.s[i] : trace.length;
      if (std::abs(pos - si) < dist) {
        dist = std::abs(pos - si);
        best = i;
      }
    }
    return best;
  };
  const int i0 = nearest(s_start), i1 = nearest(s_end);
  if (i1 <= i0) throw Error(ErrorCode::EmptySegment, "segment does not span a path edge");
  double sum = 0.0;
  for (int i = i0; i < i1; ++i) {
    const double a = trace.samples[i % n], b = trace.samples[(i + 1) % n];
    sum += 0.5 * trace.edge_lengths[i % n] * (a * a + b * b);
  }
  return sum;
}

struct SignChanges {
  int count = 0;
  bool ambiguous = false;
  int skipped = 0;
  std::vector<double> positions;  // arc length of each flip (linear interpolation)
};

/// Cyclic sign flips among samples with |value| > zero_tol.
/// Throws Error{AllAmbiguous} when no sample exceeds zero_tol.
inline SignChanges count_sign_changes(const CurveTrace& trace, double zero_tol) {
  if (!(zero_tol >= 0.0)) throw Error(ErrorCode::InvalidInput, "zero_tol must be nonnegative");
  const int n = trace.size();
  std::vector<int> kept;
  for (int i = 0; i < n; ++i)
    if (std::abs(trace.samples[i]) > zero_tol) kept.push_back(i);
  if (kept.empty()) throw Error(ErrorCode::AllAmbiguous, "every sample is below the zero tolerance");
  SignChanges out;
  out.skipped = n - static_cast<int>(kept.size());
  out.ambiguous = out.skipped > 0.2 * n;
  const int m = static_cast<int>(kept.size());
  for (int q = 0; q < m && m > 1; ++q) {
    const int i = kept[q], j = kept[(q + 1) % m];
    const double a = trace.samples[i], b = trace.samples[j];
    if ((a > 0.0) == (b > 0.0)) continue;
    double gap = trace.s[j] - trace.s[i];
    if (gap <= 0.0) gap += trace.length;
    double pos = trace.s[i] + gap * std::abs(a) / (std::abs(a) + std::abs(b));
    if (pos >= trace.length) pos -= trace.length;
    out.positions.push_back(pos);
    ++out.count;
  }
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

/// CSV rows: s,value,kind,j,lambda.
inline void write_trace_csv(std::ostream& os, const CurveTrace& trace, bool header = true) {
  if (header) os << "s,value,kind,j,lambda\n";
  os.precision(17);
  for (int i = 0; i < trace.size(); ++i)
    os << trace.s[i] << ',' << trace.samples[i] << ',' << to_string(trace.kind) << ',' << trace.eigen_index << ','
       << trace.eigenvalue << '\n';
}

}  // namespace nodal_atlas
