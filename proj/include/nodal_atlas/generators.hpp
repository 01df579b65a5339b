#pragma once

// Test surfaces with a built-in orientation-reversing involution:
//  * a flat square-grid torus with the reflection (x, y) -> (x, -y),
//  * a genus-2 double of a one-holed torus whose metric has every vertex
//    angle sum above 2*pi (discrete negative curvature).

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/mesh.hpp"

namespace nodal_atlas {

struct SymmetricSurface {
  SurfaceMesh mesh;
  Involution involution;
};

/// Vertex id of grid point (i, j) on an n x n torus grid (indices wrap).
inline int torus_vertex(int n, int i, int j) { return ((i % n + n) % n) + n * ((j % n + n) % n); }

/// Grid coordinates of a torus vertex.
inline std::pair<double, double> torus_coordinates(int n, double l1, double l2, int v) {
  return {l1 * (v % n) / n, l2 * (v / n) / n};
}

/// Glide reflection (x, y) -> (x + l1/2, -y): a fixed-point-free involution.
inline std::vector<int> torus_glide_permutation(int n) {
  std::vector<int> perm(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) perm[torus_vertex(n, i, j)] = torus_vertex(n, i + n / 2, -j);
  return perm;
}

/// Reflection (x, y) -> (x, -y).
inline std::vector<int> torus_reflection_permutation(int n) {
  std::vector<int> perm(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) perm[torus_vertex(n, i, j)] = torus_vertex(n, i, -j);
  return perm;
}

/// Square-grid torus [0,l1) x [0,l2) with n divisions per side. Rows below
/// n/2 use the "/" diagonal and rows above use "\", so the reflection
/// (x, y) -> (x, -y) is simplicial. Throws Error{BadResolution} unless n is even and >= 4.
inline SymmetricSurface gen_flat_torus(int n, double l1, double l2) {
  if (n < 4 || n % 2 != 0)
    throw Error(ErrorCode::BadResolution, "torus divisions must be even and >= 4, got " + std::to_string(n));
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw Error(ErrorCode::InvalidInput, "torus side lengths must be positive");

  const double hx = l1 / n, hy = l2 / n, hd = std::hypot(hx, hy);
  std::vector<Triangle> tris;
  tris.reserve(2 * n * n);
  EdgeLengths lengths;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = torus_vertex(n, i, j), b = torus_vertex(n, i + 1, j);
      const int c = torus_vertex(n, i + 1, j + 1), d = torus_vertex(n, i, j + 1);
      lengths[edge_key(a, b)] = hx;
      lengths[edge_key(a, d)] = hy;
      if (j < n / 2) {
        tris.push_back({a, b, c});
        tris.push_back({a, c, d});
        lengths[edge_key(a, c)] = hd;
      } else {
        tris.push_back({a, b, d});
        tris.push_back({b, c, d});
        lengths[edge_key(b, d)] = hd;
      }
    }
  }
  SymmetricSurface out;
  out.mesh = SurfaceMesh::build(n * n, std::move(tris), lengths);
  out.involution = validate_involution(out.mesh, torus_reflection_permutation(n));
  return out;
}

namespace detail {

// Vertex-scaling (discrete conformal) metric with prescribed uniform angle
// sums. l_ij = exp((u_i + u_j)/2) * base_ij; Newton on the angle defects
// with the cotangent Laplacian as Jacobian. Returns false if a step cannot
// keep every triangle valid.
inline bool uniformize_angle_sums(const SurfaceMesh& base, std::vector<double>& u, double target,
                                  int max_iter = 100) {
  const int nv = base.vertex_count();
  auto lengths_for = [&](const std::vector<double>& uu) {
    EdgeLengths out;
    for (int e = 0; e < base.edge_count(); ++e) {
      const auto& ed = base.edge(e);
      out[{ed.a, ed.b}] = std::exp(0.5 * (uu[ed.a] + uu[ed.b])) * base.edge_length(e);
    }
    return out;
  };
  auto try_build = [&](const std::vector<double>& uu, SurfaceMesh& m) {
    try {
      m = SurfaceMesh::build(nv, std::vector<Triangle>(base.triangles().begin(), base.triangles().end()),
                             lengths_for(uu));
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  auto defect = [&](const SurfaceMesh& m) {
    Eigen::VectorXd d(nv);
    for (int v = 0; v < nv; ++v) d[v] = m.angle_sum(v) - target;
    return d;
  };

  SurfaceMesh cur;
  if (!try_build(u, cur)) return false;
  Eigen::VectorXd d = defect(cur);
  for (int it = 0; it < max_iter && d.cwiseAbs().maxCoeff() > 1e-13; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int t = 0; t < cur.triangle_count(); ++t) {
      const auto& tri = cur.triangle(t);
      for (int k = 0; k < 3; ++k) {
        const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
        const double w = 0.5 * cur.corner_cot(t, k);
        trip.emplace_back(i, j, -w);
        trip.emplace_back(j, i, -w);
        trip.emplace_back(i, i, w);
        trip.emplace_back(j, j, w);
      }
    }
    // d(theta)/du = -L; pin the global scale with a tiny diagonal shift.
    Eigen::SparseMatrix<double> lap(nv, nv);
    lap.setFromTriplets(trip.begin(), trip.end());
    for (int v = 0; v < nv; ++v) lap.coeffRef(v, v) += 1e-10;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) return false;
    Eigen::VectorXd du = solver.solve(d);
    du.array() -= du.mean();

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
      std::vector<double> trial(u);
      for (int v = 0; v < nv; ++v) trial[v] += step * du[v];
      SurfaceMesh m;
      if (!try_build(trial, m)) continue;
      Eigen::VectorXd nd = defect(m);
      if (nd.norm() < d.norm()) {
        u = std::move(trial);
        cur = std::move(m);
        d = nd;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return d.cwiseAbs().maxCoeff() <= 1e-9;
}

}  // namespace detail

/// Genus-2 surface: two copies of a one-holed torus (an a x a grid torus with
/// an a/4 x a/4 block of cells removed, a = 8 * 2^subdiv) glued along the
/// hole boundary. The involution swaps the copies and fixes the boundary
/// loop, which is therefore the single, separating fixed curve. Lengths are
/// the vertex-scaled metric with equal angle sums 2*pi + 4*pi/V everywhere.
inline SymmetricSurface gen_genus2(int subdiv) {
  if (subdiv < 0 || subdiv > 4) throw Error(ErrorCode::InvalidInput, "genus-2 subdivision level must be in [0, 4]");
  const int a = 8 << subdiv;
  const int hole = a / 4;
  const int i0 = a / 4, j0 = a / 4;  // hole cells [i0, i0+hole) x [j0, j0+hole)

  auto in_hole_cell = [&](int i, int j) {
    i = (i % a + a) % a;
    j = (j % a + a) % a;
    return i >= i0 && i < i0 + hole && j >= j0 && j < j0 + hole;
  };
  auto grid = [&](int i, int j) { return ((i % a + a) % a) + a * ((j % a + a) % a); };
  // Grid vertices strictly inside the hole are dropped; those on its rim are
  // shared by both copies.
  auto strictly_inside = [&](int i, int j) { return i > i0 && i < i0 + hole && j > j0 && j < j0 + hole; };
  auto on_rim = [&](int i, int j) {
    const bool in_box = i >= i0 && i <= i0 + hole && j >= j0 && j <= j0 + hole;
    return in_box && !strictly_inside(i, j);
  };

  std::vector<int> id1(a * a, -1), id2(a * a, -1);
  int nv = 0;
  for (int j = 0; j < a; ++j)
    for (int i = 0; i < a; ++i)
      if (!strictly_inside(i, j)) id1[grid(i, j)] = nv++;
  for (int j = 0; j < a; ++j)
    for (int i = 0; i < a; ++i) {
      if (strictly_inside(i, j)) continue;
      id2[grid(i, j)] = on_rim(i, j) ? id1[grid(i, j)] : nv++;
    }

  std::vector<Triangle> tris;
  for (int j = 0; j < a; ++j) {
    for (int i = 0; i < a; ++i) {
      if (in_hole_cell(i, j)) continue;
      const int g00 = grid(i, j), g10 = grid(i + 1, j), g11 = grid(i + 1, j + 1), g01 = grid(i, j + 1);
      tris.push_back({id1[g00], id1[g10], id1[g11]});
      tris.push_back({id1[g00], id1[g11], id1[g01]});
      tris.push_back({id2[g00], id2[g11], id2[g10]});
      tris.push_back({id2[g00], id2[g01], id2[g11]});
    }
  }

  std::vector<int> perm(nv);
  for (int g = 0; g < a * a; ++g) {
    if (id1[g] < 0) continue;
    perm[id1[g]] = id2[g];
    perm[id2[g]] = id1[g];
  }

  EdgeLengths unit;
  for (const auto& t : tris)
    for (int k = 0; k < 3; ++k) unit[edge_key(t[k], t[(k + 1) % 3])] = 1.0;
  const SurfaceMesh base = SurfaceMesh::build(nv, tris, unit);

  const double target = 2.0 * std::numbers::pi + 4.0 * std::numbers::pi / nv;
  std::vector<double> u(nv, 0.0);
  if (!detail::uniformize_angle_sums(base, u, target))
    throw Error(ErrorCode::NumericallyDegenerate, "could not uniformize the genus-2 metric");

  // Exact mirror symmetry of the conformal factors, hence of the lengths.
  for (int v = 0; v < nv; ++v) {
    if (perm[v] > v) {
      const double avg = 0.5 * (u[v] + u[perm[v]]);
      u[v] = avg;
      u[perm[v]] = avg;
    }
  }
  EdgeLengths lengths;
  for (int e = 0; e < base.edge_count(); ++e) {
    const auto& ed = base.edge(e);
    lengths[{ed.a, ed.b}] = std::exp(0.5 * (u[ed.a] + u[ed.b]));
  }

  SymmetricSurface out;
  out.mesh = SurfaceMesh::build(nv, std::move(tris), lengths);
  out.involution = validate_involution(out.mesh, std::move(perm));
  return out;
}

}  // namespace nodal_atlas
