#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "nodal_atlas/generators.hpp"
#include "nodal_atlas/nodal.hpp"
#include "nodal_atlas/union_find.hpp"

using namespace nodal_atlas;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

struct Torus {
  int n;
  SymmetricSurface surface;
  OperatorPair ops;
  CurvePath gamma;  // y = 0

  explicit Torus(int n_)
      : n(n_),
        surface(gen_flat_torus(n_, kTwoPi, kTwoPi)),
        ops(assemble_operators(surface.mesh)),
        gamma(make_path(surface.mesh, fixed_point_set(surface.mesh, surface.involution).components[0])) {}

  EigenPair mode(const std::function<double(double, double)>& fn, Parity parity) const {
    EigenPair p;
    p.parity = parity;
    p.coefficients.resize(n * n);
    for (int v = 0; v < n * n; ++v) {
      const auto [x, y] = torus_coordinates(n, kTwoPi, kTwoPi, v);
      p.coefficients[v] = fn(x, y);
    }
    p.coefficients /= std::sqrt(p.coefficients.dot(ops.mass * p.coefficients));
    p.eigenvalue = p.coefficients.dot(ops.stiffness * p.coefficients);
    return p;
  }
};

// Oracle: components of the same-sign subgraph of the mesh 1-skeleton. For a
// piecewise-linear function without vertex zeros these are the nodal domains.
int vertex_sign_components(const SurfaceMesh& mesh, const std::vector<double>& values) {
  UnionFind uf(mesh.vertex_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const auto& ed = mesh.edge(e);
    if ((values[ed.a] > 0) == (values[ed.b] > 0)) uf.unite(ed.a, ed.b);
  }
  std::vector<int> labels;
  return uf.compact_labels(labels);
}

NodalGraph counts(int v, int e, int f, int m) {
  NodalGraph g;
  g.v = v;
  g.e = e;
  g.f = f;
  g.m = m;
  return g;
}

void check_graph_properties(const NodalGraph& g, const NodalDomains& d, int genus_value, const std::string& where) {
  EXPECT_TRUE(euler_check(g, genus_value)) << where;
  EXPECT_TRUE(lemma1_bounds(d, g, genus_value).holds) << where;
  EXPECT_EQ(g.degree_sum(), 2 * g.e) << where;
  for (std::size_t i = 0; i < g.roles.size(); ++i)
    if (g.roles[i] == GraphVertexRole::gamma_intersection || g.roles[i] == GraphVertexRole::singular)
      EXPECT_GE(g.degrees[i], 4) << where;
  if (g.parity == Parity::odd) EXPECT_EQ(d.count, g.f) << where;
  if (g.parity == Parity::even) EXPECT_LE(g.f, 2 * d.inert_count + d.split_count) << where;
}

}  // namespace

TEST(ExtractNodalSet, CosXGivesTwoVerticalLoops) {
  Torus t(32);
  const auto ns = extract_nodal_set(t.mode([](double x, double) { return std::cos(x); }, Parity::even), t.surface.mesh);
  EXPECT_NEAR(ns.total_length / (2.0 * kTwoPi), 1.0, 0.01);
}

TEST(ExtractNodalSet, ConstantIsEmpty) {
  Torus t(16);
  const auto ns = extract_nodal_set(t.mode([](double, double) { return 1.0; }, Parity::even), t.surface.mesh);
  EXPECT_TRUE(ns.empty());
  EXPECT_EQ(ns.total_length, 0.0);
}

TEST(ExtractNodalSet, FirstNonzeroPairHasZeros) {
  for (int level : {0, 1}) {
    const auto s = gen_genus2(level);
    const auto pairs = solve_eigenpairs(assemble_operators(s.mesh), 2, 1e-9);
    EXPECT_FALSE(extract_nodal_set(pairs[1], s.mesh).empty());
  }
}

TEST(ExtractNodalSet, CrossingsPairUpInTriangles) {
  const auto s = gen_genus2(1);
  const auto pairs = solve_eigenpairs(assemble_operators(s.mesh), 20, 1e-9);
  for (const auto& p : pairs) {
    const auto ns = extract_nodal_set(p, s.mesh);
    for (int t = 0; t < s.mesh.triangle_count(); ++t) {
      int crossed = 0;
      for (int e : s.mesh.triangle_edges(t)) crossed += ns.edge_point[e] >= 0;
      EXPECT_TRUE(crossed == 0 || crossed == 2) << "t=" << t;
    }
  }
}

TEST(ExtractNodalSet, VertexZerosAreNudgedUp) {
  Torus t(16);
  const auto p = t.mode([](double x, double) { return std::sin(x); }, Parity::even);
  int nudged = 0;
  const auto val = perturbed_values(p, default_zero_tol(p), &nudged);
  EXPECT_EQ(nudged, 2 * 16);
  for (double v : val) EXPECT_NE(v, 0.0);
}

TEST(ExtractNodalSet, CsvHasOneRowPerSegment) {
  Torus t(16);
  const auto ns = extract_nodal_set(t.mode([](double x, double) { return std::cos(x); }, Parity::even), t.surface.mesh);
  std::ostringstream os;
  write_nodal_set_csv(os, t.surface.mesh, ns);
  const std::string out = os.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(out.begin(), out.end(), '\n')), ns.segments.size() + 1);
}

TEST(CountNodalDomains, SimpleModes) {
  Torus t(32);
  EXPECT_EQ(count_nodal_domains(t.mode([](double x, double) { return std::cos(x); }, Parity::even), t.surface.mesh).count,
            2);
  EXPECT_EQ(count_nodal_domains(t.mode([](double, double) { return 1.0; }, Parity::even), t.surface.mesh).count, 1);
}

TEST(CountNodalDomains, OffsetCheckerboardMatchesSignOracle) {
  // A piecewise-linear interpolant has no nodal crossings: each saddle cell of
  // the checkerboard is resolved along its diagonal, so fewer than 4 domains remain.
  Torus t(32);
  for (double phase : {0.05, 0.11, 0.3}) {
    const auto p = t.mode([phase](double x, double y) { return std::cos(x + phase) * std::cos(y + 0.7 * phase); },
                          Parity::none);
    const auto d = count_nodal_domains(p, t.surface.mesh);
    EXPECT_EQ(d.count, vertex_sign_components(t.surface.mesh, perturbed_values(p, default_zero_tol(p))));
    EXPECT_GE(d.count, 2);
    EXPECT_LT(d.count, 4);
  }
}

TEST(CountNodalDomains, GridAlignedCheckerboardMatchesSignOracle) {
  // Zero lines of cos x cos y pass through grid vertices; the zero-to-positive
  // nudge joins the two positive cells at the saddles, leaving 3 domains.
  Torus t(32);
  const auto p = t.mode([](double x, double y) { return std::cos(x) * std::cos(y); }, Parity::even);
  const auto d = count_nodal_domains(p, t.surface.mesh);
  EXPECT_EQ(d.count, vertex_sign_components(t.surface.mesh, perturbed_values(p, default_zero_tol(p))));
  EXPECT_EQ(d.count, 3);
}

TEST(CountNodalDomains, MatchesSignOracleOnSolverPairs) {
  const auto s = gen_genus2(1);
  const auto pairs = solve_eigenpairs(assemble_operators(s.mesh), 60, 1e-9);
  for (const auto& p : pairs) {
    const auto d = count_nodal_domains(p, s.mesh);
    EXPECT_EQ(d.count, vertex_sign_components(s.mesh, perturbed_values(p, default_zero_tol(p)))) << "j=" << p.index;
    if (p.index > 0) EXPECT_GE(d.count, 2);
  }
}

TEST(DetectSingularPoints, TorusModes) {
  Torus t(32);
  const auto siny = t.mode([](double, double y) { return std::sin(y); }, Parity::odd);
  EXPECT_TRUE(detect_singular_points(t.surface.mesh, siny, t.gamma).empty());
  const auto mixed = t.mode([](double x, double y) { return std::sin(y) * std::cos(x); }, Parity::odd);
  const auto pts = detect_singular_points(t.surface.mesh, mixed, t.gamma);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_NEAR(pts[0], kTwoPi / 4.0, kTwoPi / 32.0);
  EXPECT_NEAR(pts[1], 3.0 * kTwoPi / 4.0, kTwoPi / 32.0);
  const auto even = t.mode([](double, double y) { return std::cos(y); }, Parity::even);
  expect_error(ErrorCode::WrongParity, [&] { detect_singular_points(t.surface.mesh, even, t.gamma); });
}

TEST(BuildNodalGraph, OddSinY) {
  Torus t(32);
  const auto g = build_nodal_graph(t.mode([](double, double y) { return std::sin(y); }, Parity::odd), t.surface.mesh,
                                   t.gamma);
  EXPECT_EQ(g.v, 2);
  EXPECT_EQ(g.e, 2);
  EXPECT_EQ(g.f, 2);
  EXPECT_EQ(g.m, 2);
  EXPECT_EQ(g.euler_value(), 0);
  EXPECT_TRUE(euler_check(g, 1));
}

TEST(BuildNodalGraph, EvenCosY) {
  Torus t(32);
  const auto g = build_nodal_graph(t.mode([](double, double y) { return std::cos(y); }, Parity::even), t.surface.mesh,
                                   t.gamma);
  EXPECT_EQ(g.v, 3);
  EXPECT_EQ(g.e, 3);
  EXPECT_EQ(g.f, 3);
  EXPECT_EQ(g.m, 3);
  EXPECT_TRUE(euler_check(g, 1));
}

TEST(BuildNodalGraph, EvenSinXMeetsEulerWithEquality) {
  Torus t(32);
  const auto p = t.mode([](double x, double) { return std::sin(x); }, Parity::even);
  const auto g = build_nodal_graph(p, t.surface.mesh, t.gamma);
  EXPECT_EQ(g.v, 2);
  EXPECT_EQ(g.e, 4);
  EXPECT_EQ(g.f, 2);
  EXPECT_EQ(g.m, 1);
  EXPECT_EQ(g.n, 2);
  EXPECT_EQ(g.euler_value(), -1);
  EXPECT_EQ(g.min_special_degree, 4);
  const auto d = count_nodal_domains(p, t.surface.mesh, &t.surface.involution);
  EXPECT_EQ(d.count, 2);
  const auto b = lemma1_bounds(d, g, 1);
  EXPECT_EQ(b.bound, 1);
  EXPECT_TRUE(b.holds);
}

TEST(BuildNodalGraph, OddSinYCosXHasTwoSingularPoints) {
  Torus t(32);
  const auto p = t.mode([](double x, double y) { return std::sin(y) * std::cos(x); }, Parity::odd);
  const auto g = build_nodal_graph(p, t.surface.mesh, t.gamma);
  EXPECT_EQ(g.n, 2);
  EXPECT_EQ(g.trace_singular_points, 2);
  EXPECT_GE(g.min_special_degree, 4);
  const auto d = count_nodal_domains(p, t.surface.mesh, &t.surface.involution);
  check_graph_properties(g, d, 1, "sin y cos x");
}

TEST(BuildNodalGraph, Errors) {
  Torus t(16);
  const auto none = t.mode([](double x, double) { return std::cos(x); }, Parity::none);
  expect_error(ErrorCode::WrongParity, [&] { build_nodal_graph(none, t.surface.mesh, t.gamma); });
  // A function that does not vanish on the path cannot be odd there.
  const auto fake_odd = t.mode([](double x, double) { return std::cos(x); }, Parity::odd);
  expect_error(ErrorCode::PathNotFixed, [&] { build_nodal_graph(fake_odd, t.surface.mesh, t.gamma); });
}

TEST(EulerCheck, Arithmetic) {
  EXPECT_TRUE(euler_check(counts(2, 2, 2, 2), 1));
  EXPECT_FALSE(euler_check(counts(1, 3, 1, 1), 0));
  EXPECT_TRUE(euler_check(counts(1, 1, 2, 1), 0));
}

TEST(LemmaBounds, FormulaEvaluation) {
  NodalDomains d;
  d.parity = Parity::odd;
  d.count = 1;
  NodalGraph g;
  g.parity = Parity::odd;
  g.n = 4;
  EXPECT_EQ(lemma1_bounds(d, g, 2).bound, 2);
  EXPECT_FALSE(lemma1_bounds(d, g, 2).holds);
  g.n = 0;
  EXPECT_EQ(lemma1_bounds(d, g, 2).bound, -2);
  EXPECT_TRUE(lemma1_bounds(d, g, 2).holds);
  d.parity = Parity::even;
  expect_error(ErrorCode::InconsistentInputs, [&] { lemma1_bounds(d, g, 2); });
}

class SolverPairProperties : public ::testing::TestWithParam<int> {};

TEST_P(SolverPairProperties, GraphInvariants) {
  const bool torus = GetParam() == 0;
  const auto s = torus ? gen_flat_torus(16, kTwoPi, kTwoPi) : gen_genus2(1);
  const int g = genus(s.mesh);
  const auto ops = assemble_operators(s.mesh);
  const auto path = make_path(s.mesh, fixed_point_set(s.mesh, s.involution).components[0]);
  auto pairs = solve_eigenpairs(ops, 60, 1e-10);
  pairs.resize(complete_cluster_prefix(pairs));
  const auto split = split_parity(pairs, s.involution, ops);
  // Triangles along every fixed component: inert domains must meet one of them.
  std::set<int> fixed_triangles;
  for (const auto& loop : fixed_point_set(s.mesh, s.involution).components)
    for (std::size_t i = 0; i < loop.size(); ++i)
      for (int t : s.mesh.edge_triangles(s.mesh.edge_id(loop[i], loop[(i + 1) % loop.size()])))
        fixed_triangles.insert(t);
  for (const auto& p : split) {
    if (p.eigenvalue <= 0.0) continue;
    const auto graph = build_nodal_graph(p, s.mesh, path);
    const auto d = count_nodal_domains(p, s.mesh, &s.involution);
    check_graph_properties(graph, d, g, "j=" + std::to_string(p.index));
    if (p.parity != Parity::even) continue;
    for (int dom = 0; dom < d.count; ++dom) {
      if (d.inert[dom]) {
        bool touches = false;
        for (int t : fixed_triangles)
          for (int sign : {-1, 1}) touches |= d.domain_of(t, sign) == dom;
        EXPECT_TRUE(touches) << "inert domain away from the fixed curve, j=" << p.index;
      } else {
        EXPECT_NE(d.partner[dom], dom);
        EXPECT_EQ(d.partner[d.partner[dom]], dom);
        EXPECT_EQ(d.domain_pieces[dom], d.domain_pieces[d.partner[dom]]);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Meshes, SolverPairProperties, ::testing::Values(0, 1),
                         [](const auto& info) { return info.param == 0 ? std::string("Torus") : std::string("Genus2"); });
