#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nodal_atlas/generators.hpp"
#include "nodal_atlas/restriction.hpp"

using namespace nodal_atlas;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

std::vector<int> torus_row(int n, int j) {
  std::vector<int> row;
  for (int i = 0; i < n; ++i) row.push_back(torus_vertex(n, i, j));
  return row;
}

// Sampled grid function on an n x n (2 pi)^2 torus, mass-normalized.
template <class Fn>
EigenPair torus_mode(const SurfaceMesh& mesh, const OperatorPair& ops, int n, double lambda, Fn&& fn) {
  EigenPair p;
  p.eigenvalue = lambda;
  p.coefficients.resize(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) p.coefficients[v] = fn(kTwoPi * (v % n) / n, kTwoPi * (v / n) / n);
  p.coefficients /= std::sqrt(p.coefficients.dot(ops.mass * p.coefficients));
  return p;
}

CurveTrace raw_trace(const std::vector<double>& samples, const std::vector<double>& edges) {
  CurveTrace t;
  t.samples = samples;
  t.edge_lengths = edges;
  double acc = 0.0;
  for (double e : edges) {
    t.s.push_back(acc);
    acc += e;
  }
  t.length = acc;
  return t;
}

struct Torus16 {
  int n = 16;
  SymmetricSurface surface = gen_flat_torus(16, kTwoPi, kTwoPi);
  OperatorPair ops = assemble_operators(surface.mesh);
  CurvePath row0 = make_path(surface.mesh, torus_row(16, 0));
};

}  // namespace

TEST(MakePath, TorusRowHasLengthL1) {
  const auto s = gen_flat_torus(16, 3.0, 5.0);
  const auto path = make_path(s.mesh, torus_row(16, 0));
  EXPECT_NEAR(path.length, 3.0, 1e-12);
  for (int i = 1; i < path.size(); ++i) EXPECT_GT(path.s[i], path.s[i - 1]);
  EXPECT_EQ(path.s[0], 0.0);
}

TEST(MakePath, RepeatedEndpointIsAccepted) {
  Torus16 t;
  auto verts = torus_row(16, 3);
  verts.push_back(verts.front());
  EXPECT_EQ(make_path(t.surface.mesh, verts).size(), 16);
}

TEST(MakePath, ChordIsNotAPath) {
  Torus16 t;
  auto verts = torus_row(16, 0);
  verts[5] = torus_vertex(16, 5, 3);
  expect_error(ErrorCode::NotAPath, [&] { make_path(t.surface.mesh, verts); });
  expect_error(ErrorCode::NotAPath, [&] { make_path(t.surface.mesh, {0, 1}); });
}

TEST(MakePath, OpenListIsNotClosed) {
  Torus16 t;
  expect_error(ErrorCode::NotClosed,
               [&] { make_path(t.surface.mesh, {torus_vertex(16, 0, 0), torus_vertex(16, 1, 0), torus_vertex(16, 2, 0)}); });
}

TEST(MakePath, FigureEightIsSelfIntersecting) {
  Torus16 t;
  auto v = [](int i, int j) { return torus_vertex(16, i, j); };
  expect_error(ErrorCode::SelfIntersecting, [&] {
    make_path(t.surface.mesh, {v(0, 0), v(1, 0), v(1, 1), v(2, 1), v(2, 2), v(1, 2), v(1, 1), v(0, 1)});
  });
}

TEST(Restrict, CosYOnRowZeroIsConstant) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 1.0, [](double, double y) { return std::cos(y); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  ASSERT_EQ(tr.size(), 16);
  for (double v : tr.samples) EXPECT_DOUBLE_EQ(v, p.coefficients[0]);
  const auto nt = restrict(t.surface.mesh, p, t.row0, TraceKind::neumann_normalized);
  for (double v : nt.samples) EXPECT_LE(std::abs(v), 1e-12);
}

TEST(Restrict, SinYNormalDerivative) {
  // d/dy sin(y) = 1 at y = 0; the central fan difference of the interpolant is sin(h)/h.
  const int n = 32;
  const auto s = gen_flat_torus(n, kTwoPi, kTwoPi);
  const auto ops = assemble_operators(s.mesh);
  const auto p = torus_mode(s.mesh, ops, n, 1.0, [](double, double y) { return std::sin(y); });
  const auto path = make_path(s.mesh, torus_row(n, 0));
  const auto nt = restrict(s.mesh, p, path, TraceKind::neumann_normalized);
  const double h = kTwoPi / n;
  const double expect = p.coefficients[torus_vertex(n, 0, 1)] / h;
  for (double v : nt.samples) EXPECT_NEAR(std::abs(v), expect, 1e-10 * expect);
  for (double v : nt.samples) EXPECT_EQ(v > 0, nt.samples[0] > 0);
}

TEST(Restrict, NeumannOfZeroEigenvalue) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 0.0, [](double, double) { return 1.0; });
  expect_error(ErrorCode::ZeroEigenvalue, [&] { restrict(t.surface.mesh, p, t.row0, TraceKind::neumann_normalized); });
}

TEST(Restrict, ParityTracesVanishOnFixedCurve) {
  const auto s = gen_genus2(1);
  const auto ops = assemble_operators(s.mesh);
  const auto fc = fixed_point_set(s.mesh, s.involution);
  const auto path = make_path(s.mesh, fc.components[0]);
  auto pairs = solve_eigenpairs(ops, 60, 1e-10);
  pairs.resize(complete_cluster_prefix(pairs));
  const auto split = split_parity(pairs, s.involution, ops);
  int even = 0, odd = 0;
  for (const auto& p : split) {
    if (p.eigenvalue <= 0.0) continue;
    const bool is_even = p.parity == Parity::even;
    const auto tr = restrict(s.mesh, p, path, is_even ? TraceKind::neumann_normalized : TraceKind::dirichlet);
    double worst = 0.0;
    for (double v : tr.samples) worst = std::max(worst, std::abs(v));
    EXPECT_LE(worst, 1e-6 * sup_norm(p)) << "j=" << p.index;
    (is_even ? even : odd)++;
  }
  EXPECT_GT(even, 10);
  EXPECT_GT(odd, 10);
}

TEST(PeriodIntegral, CosXOverFullPeriod) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 1.0, [](double x, double) { return std::cos(x); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  EXPECT_NEAR(period_integral(tr, std::vector<double>(16, 1.0)), 0.0, 1e-8);
}

TEST(PeriodIntegral, SelfPairingEqualsSquaredNorm) {
  Torus16 t;
  const auto p =
      torus_mode(t.surface.mesh, t.ops, t.n, 2.0, [](double x, double y) { return std::cos(x) + 0.3 * std::sin(y + x); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  EXPECT_DOUBLE_EQ(period_integral(tr, tr.samples), l2_norm_on_segment(tr, 0.0, tr.length));
}

TEST(PeriodIntegral, LengthMismatch) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 1.0, [](double x, double) { return std::cos(x); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  expect_error(ErrorCode::LengthMismatch, [&] { period_integral(tr, std::vector<double>(15, 1.0)); });
}

TEST(PeriodIntegral, SecondOrderConvergence) {
  // |sin(s/2)| has a kink at s = 0, so the periodic trapezoid rule is only second order.
  // Closed form: the integral over [0, 2 pi] is 4.
  auto quad = [](int n) {
    std::vector<double> samples, edges(n, kTwoPi / n);
    for (int i = 0; i < n; ++i) samples.push_back(std::abs(std::sin(0.5 * kTwoPi * i / n)));
    return period_integral(raw_trace(samples, edges), std::vector<double>(n, 1.0));
  };
  std::vector<double> err;
  for (int n : {16, 32, 64, 128}) err.push_back(std::abs(quad(n) - 4.0));
  for (std::size_t i = 0; i + 1 < err.size(); ++i) EXPECT_NEAR(std::log2(err[i] / err[i + 1]), 2.0, 0.05);
  const double richardson = (4.0 * quad(128) - quad(64)) / 3.0;
  EXPECT_LT(std::abs(richardson - 4.0), 1e-3 * err.back());
}

TEST(L2NormOnSegment, ConstantTrace) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 1.0, [](double, double y) { return std::cos(y); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  const double c = tr.samples[0];
  const double full = l2_norm_on_segment(tr, 0.0, tr.length);
  EXPECT_NEAR(full, c * c * kTwoPi, 1e-12);
  EXPECT_NEAR(l2_norm_on_segment(tr, 0.0, 0.5 * tr.length), 0.5 * full, 1e-12);
  EXPECT_NEAR(l2_norm_on_segment(tr, 0.5 * tr.length, tr.length), 0.5 * full, 1e-12);
}

TEST(L2NormOnSegment, ShortSegmentIsEmpty) {
  Torus16 t;
  const auto p = torus_mode(t.surface.mesh, t.ops, t.n, 1.0, [](double, double y) { return std::cos(y); });
  const auto tr = restrict(t.surface.mesh, p, t.row0, TraceKind::dirichlet);
  const double h = tr.length / 16;
  expect_error(ErrorCode::EmptySegment, [&] { l2_norm_on_segment(tr, 0.1 * h, 0.3 * h); });
  expect_error(ErrorCode::InvalidInput, [&] { l2_norm_on_segment(tr, 0.5, 0.2); });
}

TEST(CountSignChanges, CosineModes) {
  const int n = 64;
  const auto s = gen_flat_torus(n, kTwoPi, kTwoPi);
  const auto ops = assemble_operators(s.mesh);
  const auto path = make_path(s.mesh, torus_row(n, 0));
  for (int k = 1; k <= 7; ++k) {
    const auto p = torus_mode(s.mesh, ops, n, k * k, [k](double x, double) { return std::cos(k * x + 0.1); });
    const auto tr = restrict(s.mesh, p, path, TraceKind::dirichlet);
    // Oracle: brute-force flip count on the analytic sequence.
    int flips = 0;
    for (int i = 0; i < n; ++i) {
      const double a = std::cos(k * kTwoPi * i / n + 0.1), b = std::cos(k * kTwoPi * (i + 1) / n + 0.1);
      flips += (a > 0) != (b > 0);
    }
    const auto sc = count_sign_changes(tr, 1e-6 * sup_norm(p));
    EXPECT_EQ(sc.count, flips);
    EXPECT_EQ(sc.count, 2 * k);
    EXPECT_FALSE(sc.ambiguous);
    EXPECT_EQ(sc.positions.size(), static_cast<std::size_t>(2 * k));
  }
}

TEST(CountSignChanges, PositiveTraceAndAmbiguity) {
  const auto pos = raw_trace({1, 2, 3, 2}, {1, 1, 1, 1});
  EXPECT_EQ(count_sign_changes(pos, 0.0).count, 0);
  const auto mostly_zero = raw_trace({1, 0, 0, -1, 0}, {1, 1, 1, 1, 1});
  const auto sc = count_sign_changes(mostly_zero, 1e-9);
  EXPECT_EQ(sc.count, 2);
  EXPECT_EQ(sc.skipped, 3);
  EXPECT_TRUE(sc.ambiguous);
  expect_error(ErrorCode::AllAmbiguous, [] { count_sign_changes(raw_trace({0, 1e-9, 0}, {1, 1, 1}), 1e-6); });
}

TEST(Properties, SignChangeCountIsEvenOnLoops) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(3, 40);
  std::normal_distribution<double> val(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    std::vector<double> samples(n), edges(n);
    for (int i = 0; i < n; ++i) {
      samples[i] = unit(rng) < 0.15 ? 0.0 : val(rng);
      edges[i] = 0.1 + unit(rng);
    }
    const auto tr = raw_trace(samples, edges);
    try {
      EXPECT_EQ(count_sign_changes(tr, 0.3 * unit(rng)).count % 2, 0);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::AllAmbiguous);
    }
  }
}

TEST(Properties, PeriodIntegralIsLinear) {
  const auto s = gen_genus2(0);
  const auto fc = fixed_point_set(s.mesh, s.involution);
  const auto path = make_path(s.mesh, fc.components[0]);
  const int nv = s.mesh.vertex_count(), np = path.size();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> val(0.0, 1.0);
  auto random_vec = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = val(rng);
    return v;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    EigenPair u, w, mix;
    u.coefficients = random_vec(nv);
    w.coefficients = random_vec(nv);
    const double a = val(rng), b = val(rng);
    mix.coefficients = a * u.coefficients + b * w.coefficients;
    u.eigenvalue = w.eigenvalue = mix.eigenvalue = 1.0;
    const auto kind = trial % 2 ? TraceKind::dirichlet : TraceKind::neumann_normalized;
    const auto tu = restrict(s.mesh, u, path, kind), tw = restrict(s.mesh, w, path, kind),
               tm = restrict(s.mesh, mix, path, kind);
    const Eigen::VectorXd fv = random_vec(np), gv = random_vec(np);
    const std::vector<double> f(fv.data(), fv.data() + np), g(gv.data(), gv.data() + np);
    std::vector<double> fg(np);
    for (int i = 0; i < np; ++i) fg[i] = a * f[i] + b * g[i];
    // Linear in the trace.
    const double lhs = period_integral(tm, f), rhs = a * period_integral(tu, f) + b * period_integral(tw, f);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(rhs)));
    // Linear in the weight.
    const double lf = period_integral(tu, fg), rf = a * period_integral(tu, f) + b * period_integral(tu, g);
    EXPECT_NEAR(lf, rf, 1e-10 * (1.0 + std::abs(rf)));
  }
}

TEST(Properties, ReversalAndNormalFlip) {
  const auto s = gen_genus2(1);
  const auto ops = assemble_operators(s.mesh);
  const auto fc = fixed_point_set(s.mesh, s.involution);
  const auto path = make_path(s.mesh, fc.components[0]);
  const auto rev = reversed(s.mesh, path);
  const auto flipped = path.with_flipped_normal();
  const int n = path.size();
  ASSERT_EQ(rev.vertices[0], path.vertices[0]);
  EXPECT_NEAR(rev.length, path.length, 1e-12 * path.length);
  // Position of path vertex i inside the reversed list.
  auto rev_index = [n](int i) { return (n - i) % n; };
  std::mt19937_64 rng(3);
  std::normal_distribution<double> val(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    EigenPair p;
    p.eigenvalue = 2.0;
    p.coefficients.resize(s.mesh.vertex_count());
    for (int v = 0; v < s.mesh.vertex_count(); ++v) p.coefficients[v] = val(rng);
    std::vector<double> f(n), f_rev(n);
    for (int i = 0; i < n; ++i) f_rev[rev_index(i)] = f[i] = val(rng);
    for (auto kind : {TraceKind::dirichlet, TraceKind::neumann_normalized}) {
      const auto a = restrict(s.mesh, p, path, kind), b = restrict(s.mesh, p, rev, kind);
      EXPECT_NEAR(period_integral(a, f), period_integral(b, f_rev), 1e-10);
      EXPECT_EQ(count_sign_changes(a, 1e-9).count, count_sign_changes(b, 1e-9).count);
      for (int i = 0; i < n; ++i) EXPECT_NEAR(a.samples[i], b.samples[rev_index(i)], 1e-12);
    }
    const auto nt = restrict(s.mesh, p, path, TraceKind::neumann_normalized);
    const auto nf = restrict(s.mesh, p, flipped, TraceKind::neumann_normalized);
    for (int i = 0; i < n; ++i) EXPECT_EQ(nf.samples[i], -nt.samples[i]);
  }
}

TEST(Properties, RegularZerosOfEvenTracesFlipSign) {
  // Even torus modes sin(kx), cos(kx) cos(y) vanish at grid points of the row y = 0.
  const int n = 32;
  const auto s = gen_flat_torus(n, kTwoPi, kTwoPi);
  const auto ops = assemble_operators(s.mesh);
  const auto path = make_path(s.mesh, torus_row(n, 0));
  int checked = 0;
  for (int k = 1; k <= 4; ++k) {
    for (int variant = 0; variant < 2; ++variant) {
      const auto p = torus_mode(s.mesh, ops, n, k * k, [k, variant](double x, double y) {
        return variant == 0 ? std::sin(k * x) : std::cos(k * x) * std::cos(y);
      });
      const auto tr = restrict(s.mesh, p, path, TraceKind::dirichlet);
      const double tol = 1e-6 * sup_norm(p);
      for (int i = 0; i < n; ++i) {
        const int prev = (i + n - 1) % n, next = (i + 1) % n;
        const double h = tr.edge_lengths[i];
        const double slope = (tr.samples[next] - tr.samples[prev]) / (2.0 * h);
        if (std::abs(tr.samples[i]) > tol || std::abs(slope) <= 10.0 * tol / h) continue;
        EXPECT_NE(tr.samples[prev] > 0, tr.samples[next] > 0) << "k=" << k << " i=" << i;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(WriteTraceCsv, HeaderAndRows) {
  const auto tr = raw_trace({0.5, -0.25, 1.0}, {1, 1, 1});
  std::ostringstream os;
  write_trace_csv(os, tr);
  const std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), "s,value,kind,j,lambda");
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 4);
}
