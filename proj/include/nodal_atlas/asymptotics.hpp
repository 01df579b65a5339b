#pragma once

// Kuznecov partial sums, exceptional-density counts, the density-one
// subsequence construction, and restricted quantum-ergodic statistics.

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/restriction.hpp"
#include "nodal_atlas/spectral.hpp"

namespace nodal_atlas {

// ---------------------------------------------------------------- Kuznecov

struct PowerFit {
  double exponent = 0.0;
  double coefficient = 0.0;  // S ~ coefficient * lambda^exponent
  int points = 0;
  double lambda_min = 0.0, lambda_max = 0.0;
};

struct KuznecovSeries {
  TraceKind kind = TraceKind::dirichlet;
  std::vector<double> eigenvalues;
  std::vector<double> periods;       // p_j
  std::vector<double> partial_sums;  // S_j = sum_{i <= j} p_i^2
  double weight_integral = 0.0;      // int_gamma f ds
  bool fit_flagged = false;          // |int f| negligible: no growth law to fit
  std::optional<PowerFit> fit;

  /// S(lambda) = sum over lambda_j < lambda of p_j^2.
  double sum_below(double lambda) const {
    const auto it = std::lower_bound(eigenvalues.begin(), eigenvalues.end(), lambda);
    const auto k = it - eigenvalues.begin();
    return k == 0 ? 0.0 : partial_sums[k - 1];
  }
};

/// Least-squares fit of log S against log lambda over [lambda_lo, lambda_hi],
/// one point per distinct eigenvalue (S taken after the whole cluster).
inline std::optional<PowerFit> fit_power_law(const std::vector<double>& lambda, const std::vector<double>& s,
                                             double lambda_lo, double lambda_hi) {
  std::vector<double> xs, ys;
  const std::size_t n = lambda.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (j + 1 < n && lambda[j + 1] - lambda[j] <= kClusterRelTol * (1.0 + lambda[j])) continue;
    if (lambda[j] < lambda_lo || lambda[j] > lambda_hi || !(lambda[j] > 0.0) || !(s[j] > 0.0)) continue;
    xs.push_back(std::log(lambda[j]));
    ys.push_back(std::log(s[j]));
  }
  if (xs.size() < 2) return std::nullopt;
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double den = m * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) return std::nullopt;
  PowerFit fit;
  fit.exponent = (m * sxy - sx * sy) / den;
  fit.coefficient = std::exp((sy - fit.exponent * sx) / m);
  fit.points = static_cast<int>(xs.size());
  fit.lambda_min = std::exp(xs.front());
  fit.lambda_max = std::exp(xs.back());
  return fit;
}

struct KuznecovOptions {
  /// Fit window; unset means the top half of the spectrum above the lowest 20.
  std::optional<double> lambda_lo, lambda_hi;
};

/// Series from precomputed traces (sorted by eigenvalue) and weight samples.
/// Throws Error{TooFewPairs, LengthMismatch}.
inline KuznecovSeries kuznecov(const std::vector<CurveTrace>& traces, const std::vector<double>& f,
                               const KuznecovOptions& options = {}) {
  constexpr int kMinPairs = 20;
  if (static_cast<int>(traces.size()) < kMinPairs)
    throw Error(ErrorCode::TooFewPairs, "Kuznecov sums need at least 20 eigenpairs, got " +
                                            std::to_string(traces.size()));
  KuznecovSeries out;
  out.kind = traces.front().kind;
  double acc = 0.0;
  for (const auto& tr : traces) {
    const double p = period_integral(tr, f);
    acc += p * p;
    out.eigenvalues.push_back(tr.eigenvalue);
    out.periods.push_back(p);
    out.partial_sums.push_back(acc);
  }
  const CurveTrace& first = traces.front();
  double fmax = 0.0, integral = 0.0;
  for (int i = 0; i < first.size(); ++i) {
    fmax = std::max(fmax, std::abs(f[i]));
    integral += 0.5 * first.edge_lengths[i] * (f[i] + f[(i + 1) % first.size()]);
  }
  out.weight_integral = integral;
  out.fit_flagged = std::abs(integral) <= 1e-8 * first.length * fmax;
  if (!out.fit_flagged) {
    const int n = static_cast<int>(traces.size());
    const int start = std::max(kMinPairs, n / 2);
    const double lo = options.lambda_lo.value_or(out.eigenvalues[std::min(start, n - 1)]);
    const double hi = options.lambda_hi.value_or(out.eigenvalues.back());
    out.fit = fit_power_law(out.eigenvalues, out.partial_sums, lo, hi);
  }
  return out;
}

/// Series for solver eigenpairs along a path.
inline KuznecovSeries kuznecov(const SurfaceMesh& mesh, const std::vector<EigenPair>& pairs, const CurvePath& path,
                               const std::vector<double>& f, TraceKind kind, const KuznecovOptions& options = {}) {
  std::vector<CurveTrace> traces;
  traces.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (kind == TraceKind::neumann_normalized && !(p.eigenvalue > 0.0)) continue;
    traces.push_back(restrict(mesh, p, path, kind));
  }
  return kuznecov(traces, f, options);
}

struct DensityWindow {
  double t = 0.0;  // window [t, 2t)
  int count = 0;
  int exceeding = 0;
  double fraction = 0.0;
};

/// Per dyadic window [e 2^i, e 2^{i+1}): fraction of j with
/// |p_j| > C lambda_j^{-1/4} (log lambda_j)^{1/2}. Eigenvalues <= e are ignored.
inline std::vector<DensityWindow> chebyshev_density(const std::vector<double>& eigenvalues,
                                                    const std::vector<double>& periods, double c) {
  if (eigenvalues.size() != periods.size())
    throw Error(ErrorCode::LengthMismatch, "eigenvalue and period lists differ in length");
  std::vector<DensityWindow> out;
  const double e = std::numbers::e;
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    const double lam = eigenvalues[j];
    if (!(lam > e)) continue;
    const int w = static_cast<int>(std::floor(std::log2(lam / e)));
    while (static_cast<int>(out.size()) <= w) out.push_back({e * std::ldexp(1.0, static_cast<int>(out.size()))});
    auto& win = out[w];
    ++win.count;
    if (std::abs(periods[j]) > c * std::pow(lam, -0.25) * std::sqrt(std::log(lam))) ++win.exceeding;
  }
  for (auto& win : out) win.fraction = win.count ? static_cast<double>(win.exceeding) / win.count : 0.0;
  return out;
}

inline std::vector<DensityWindow> chebyshev_density(const KuznecovSeries& series, double c) {
  return chebyshev_density(series.eigenvalues, series.periods, c);
}

// ------------------------------------------------------ density-one extraction

struct DensityBlock {
  int k = 0;
  long start = 0, end = 0;  // [start, end), 1-based indices
  std::vector<long> members;
};

struct DensityExtraction {
  long horizon = 0;              // X
  std::vector<long> cut_points;  // n_1, n_2, ... (certified only)
  std::vector<DensityBlock> blocks;
  long selected = 0;             // |A|
  double density = 0.0;         // |A| / X
  int last_k = 0;               // largest certified k
};

/// Finite-horizon transcription of the density-one construction on a_1..a_X:
/// n_k is the least n with #{j <= m : a_j > k} / m > 1 - 2^{-k} for every m
/// in [n, X]; the construction stops at the first k without such n;
/// A_k = {n_k <= j < n_{k+1} : a_j > k}, the last block running to X.
/// Throws Error{HypothesisFailed} when n_1 does not exist.
inline DensityExtraction density_one_extract(const std::vector<double>& a) {
  const long x = static_cast<long>(a.size());
  if (x < 10) throw Error(ErrorCode::InvalidInput, "density extraction needs at least 10 terms");
  DensityExtraction out;
  out.horizon = x;
  for (int k = 1; k < 62; ++k) {
    const double threshold = 1.0 - std::ldexp(1.0, -k);
    long hits = 0, last_bad = 0;
    for (long m = 1; m <= x; ++m) {
      if (a[m - 1] > k) ++hits;
      if (!(static_cast<double>(hits) > threshold * static_cast<double>(m))) last_bad = m;
    }
    if (last_bad == x) {
      if (k == 1)
        throw Error(ErrorCode::HypothesisFailed,
                    "the proportion of terms above 1 does not stay above 1/2 on the available prefix");
      break;
    }
    out.cut_points.push_back(last_bad + 1);
    out.last_k = k;
  }
  const int kmax = out.last_k;
  for (int k = 1; k <= kmax; ++k) {
    DensityBlock b;
    b.k = k;
    b.start = out.cut_points[k - 1];
    b.end = k < kmax ? std::max(b.start, out.cut_points[k]) : x + 1;
    for (long j = b.start; j < b.end; ++j)
      if (a[j - 1] > k) b.members.push_back(j);
    out.selected += static_cast<long>(b.members.size());
    out.blocks.push_back(std::move(b));
  }
  out.density = static_cast<double>(out.selected) / static_cast<double>(x);
  return out;
}

struct GrowthReport {
  std::string label;
  bool extracted = false;
  std::string message;
  double density = 0.0;
  std::vector<long> subsequence;       // 1-based indices into the counts
  std::vector<double> block_minimum;   // minimum count along A in each block
  bool minimum_increasing = false;     // strictly increasing across blocks
};

/// Feeds per-eigenpair counts into the density-one construction.
inline GrowthReport growth_report(const std::vector<double>& counts, std::string label) {
  GrowthReport r;
  r.label = std::move(label);
  try {
    const auto ex = density_one_extract(counts);
    r.extracted = true;
    r.density = ex.density;
    for (const auto& b : ex.blocks) {
      if (b.members.empty()) continue;
      double mn = counts[b.members.front() - 1];
      for (long j : b.members) {
        mn = std::min(mn, counts[j - 1]);
        r.subsequence.push_back(j);
      }
      r.block_minimum.push_back(mn);
    }
    r.minimum_increasing = !r.block_minimum.empty();
    for (std::size_t i = 1; i < r.block_minimum.size(); ++i)
      if (!(r.block_minimum[i] > r.block_minimum[i - 1])) r.minimum_increasing = false;
    r.message = "ok";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::HypothesisFailed && e.code() != ErrorCode::InvalidInput) throw;
    r.message = e.code() == ErrorCode::HypothesisFailed ? "growth not observed at this resolution"
                                                        : "too few terms for extraction";
  }
  return r;
}

// ------------------------------------------------------------------- QER

/// int_{-1}^{1} (1 - s^2)^{-1/2} ds.
inline double weight_integral_inverse_sqrt() {
  boost::math::quadrature::tanh_sinh<double> q;
  // The second argument is the signed distance to the nearer endpoint, which
  // keeps 1 - s^2 = d (2 - d) accurate at the singularities.
  return q.integrate(
      [](double, double sc) {
        const double d = std::abs(sc);
        return 1.0 / std::sqrt(d * (2.0 - d));
      },
      -1.0, 1.0);
}

/// int_{-1}^{1} (1 - s^2)^{1/2} ds.
inline double weight_integral_sqrt() {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([](double s) { return std::sqrt(std::max(0.0, 1.0 - s * s)); }, -1.0, 1.0);
}

enum class QerKind { dirichlet, neumann, cauchy };

inline const char* to_string(QerKind k) {
  switch (k) {
    case QerKind::dirichlet: return "dirichlet";
    case QerKind::neumann: return "neumann";
    default: return "cauchy";
  }
}

inline QerKind qer_kind_from_string(const std::string& s) {
  if (s == "dirichlet") return QerKind::dirichlet;
  if (s == "neumann") return QerKind::neumann;
  if (s == "cauchy") return QerKind::cauchy;
  throw Error(ErrorCode::InvalidInput, "unknown QER kind '" + s + "'");
}

/// Limit constant 4 / (2 pi Area) * W * int_gamma f ds with W the fiber
/// weight integral: pi for the Dirichlet kind, pi/2 for Neumann and Cauchy.
inline double qer_target(QerKind kind, double f_integral, double area) {
  const double w = kind == QerKind::dirichlet ? weight_integral_inverse_sqrt() : weight_integral_sqrt();
  return 4.0 / (2.0 * std::numbers::pi * area) * w * f_integral;
}

/// The Dirichlet target with the (1 - s^2)^{1/2} fiber weight instead, the
/// variant appearing in the sign-change argument; reported alongside.
inline double qer_target_sqrt_variant(double f_integral, double area) {
  return 4.0 / (2.0 * std::numbers::pi * area) * weight_integral_sqrt() * f_integral;
}

struct QerSample {
  QerKind kind = QerKind::dirichlet;
  std::vector<int> indices;
  std::vector<double> eigenvalues;
  std::vector<double> statistics;
  std::vector<double> dirichlet_parts;  // cauchy: the renormalized Dirichlet term alone
  double target = 0.0;                  // omega(f)
  double target_sqrt_variant = 0.0;
  int window = 25;
  std::vector<double> window_variances;  // variance of (statistic - target) per window
};

/// Periodic second difference of trace samples in arc length.
inline std::vector<double> tangential_second_difference(const CurveTrace& tr) {
  const int n = tr.size();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double hm = tr.edge_lengths[(i + n - 1) % n], hp = tr.edge_lengths[i];
    const double um = tr.samples[(i + n - 1) % n], u = tr.samples[i], up = tr.samples[(i + 1) % n];
    out[i] = 2.0 * ((up - u) / hp - (u - um) / hm) / (hp + hm);
  }
  return out;
}

/// Restricted matrix elements for even eigenpairs:
///   dirichlet  int f phi^2,
///   neumann    int f (lambda^{-1/2} d_nu phi)^2,
///   cauchy     neumann + int f ((1 + lambda^{-1} d^2/ds^2) phi) phi,
/// with the window variance of (statistic - omega(f)) over consecutive windows.
/// Dirichlet and Cauchy kinds require the path inside Fix(sigma).
/// Throws Error{WrongParity, PathNotFixed, LengthMismatch}.
inline QerSample qer_statistic(const SurfaceMesh& mesh, const std::vector<EigenPair>& pairs, const CurvePath& path,
                               const std::vector<double>& f, QerKind kind, const Involution* inv,
                               int window = 25) {
  if (static_cast<int>(f.size()) != path.size())
    throw Error(ErrorCode::LengthMismatch, "weight samples do not match the path");
  if (kind != QerKind::neumann) {
    bool fixed = inv != nullptr;
    for (int v : path.vertices) fixed = fixed && inv->fixes(v);
    if (!fixed) throw Error(ErrorCode::PathNotFixed, "Dirichlet and Cauchy statistics need a path in Fix(sigma)");
  }
  QerSample out;
  out.kind = kind;
  out.window = window;
  double f_integral = 0.0;
  for (int i = 0; i < path.size(); ++i) f_integral += 0.5 * path.edge_lengths[i] * (f[i] + f[(i + 1) % path.size()]);
  out.target = qer_target(kind, f_integral, mesh.area());
  out.target_sqrt_variant = qer_target_sqrt_variant(f_integral, mesh.area());

  for (const auto& p : pairs) {
    if (p.parity != Parity::even)
      throw Error(ErrorCode::WrongParity, "QER statistics are defined for even eigenpairs");
    if (!(p.eigenvalue > 0.0)) continue;
    auto weighted = [&](const CurveTrace& a, const std::vector<double>& b) {
      std::vector<double> fb(b.size());
      for (std::size_t i = 0; i < b.size(); ++i) fb[i] = f[i] * b[i];
      return period_integral(a, fb);
    };
    double stat = 0.0, dpart = 0.0;
    if (kind == QerKind::dirichlet) {
      const auto d = restrict(mesh, p, path, TraceKind::dirichlet);
      stat = weighted(d, d.samples);
      dpart = stat;
    } else {
      const auto nn = restrict(mesh, p, path, TraceKind::neumann_normalized);
      stat = weighted(nn, nn.samples);
      if (kind == QerKind::cauchy) {
        const auto d = restrict(mesh, p, path, TraceKind::dirichlet);
        const auto d2 = tangential_second_difference(d);
        std::vector<double> renorm(d.samples.size());
        for (std::size_t i = 0; i < renorm.size(); ++i) renorm[i] = d.samples[i] + d2[i] / p.eigenvalue;
        dpart = weighted(d, renorm);
        stat += dpart;
      }
    }
    out.indices.push_back(p.index);
    out.eigenvalues.push_back(p.eigenvalue);
    out.statistics.push_back(stat);
    out.dirichlet_parts.push_back(dpart);
  }
  for (std::size_t w0 = 0; w0 + window <= out.statistics.size(); w0 += window) {
    double mean = 0.0;
    for (int i = 0; i < window; ++i) mean += out.statistics[w0 + i] - out.target;
    mean /= window;
    double var = 0.0;
    for (int i = 0; i < window; ++i) {
      const double d = out.statistics[w0 + i] - out.target - mean;
      var += d * d;
    }
    out.window_variances.push_back(var / window);
  }
  return out;
}

/// Length of the longest run of consecutive windows with nonincreasing variance.
inline int longest_nonincreasing_run(const std::vector<double>& v) {
  if (v.empty()) return 0;
  int best = 1, cur = 1;
  for (std::size_t i = 1; i < v.size(); ++i) {
    cur = v[i] <= v[i - 1] ? cur + 1 : 1;
    best = std::max(best, cur);
  }
  return best;
}

}  // namespace nodal_atlas
