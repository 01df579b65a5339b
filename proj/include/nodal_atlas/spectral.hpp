#pragma once

// Discrete Laplacian (cotangent stiffness / mass pair), the generalized
// symmetric eigensolver for the low end of the spectrum, and the even/odd
// splitting of eigenspaces under an involution.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "nodal_atlas/error.hpp"
#include "nodal_atlas/involution.hpp"
#include "nodal_atlas/mesh.hpp"
#include "nodal_atlas/parallel.hpp"

namespace nodal_atlas {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class MassKind { lumped, consistent };

enum class Parity { none, even, odd };

inline const char* to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    default: return "none";
  }
}

inline Parity parity_from_string(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  if (s == "none") return Parity::none;
  throw Error(ErrorCode::InvalidInput, "unknown parity '" + s + "'");
}

struct OperatorPair {
  SparseMatrix stiffness;  // cotangent Laplacian, PSD, rows sum to 0
  SparseMatrix mass;       // SPD; all-ones quadratic form = surface area
  MassKind mass_kind = MassKind::lumped;
};

/// Cotangent stiffness and mass from intrinsic lengths.
/// Throws Error{NumericallyDegenerate} if a corner angle is within 1e-9 of 0 or pi.
inline OperatorPair assemble_operators(const SurfaceMesh& mesh, MassKind mass_kind = MassKind::lumped) {
  constexpr double kAngleGuard = 1e-9;
  const int nv = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> s_trip, m_trip;
  s_trip.reserve(12 * mesh.triangle_count());
  m_trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) {
      const double angle = mesh.corner_angle(t, k);
      if (angle < kAngleGuard || angle > std::numbers::pi - kAngleGuard)
        throw Error(ErrorCode::NumericallyDegenerate,
                    "triangle " + std::to_string(t) + " has corner angle " + std::to_string(angle));
    }
    for (int k = 0; k < 3; ++k) {
      const int i = tri[(k + 1) % 3], j = tri[(k + 2) % 3];
      const double w = 0.5 * mesh.corner_cot(t, k);
      s_trip.emplace_back(i, j, -w);
      s_trip.emplace_back(j, i, -w);
      s_trip.emplace_back(i, i, w);
      s_trip.emplace_back(j, j, w);
    }
    const double area = mesh.triangle_area(t);
    if (mass_kind == MassKind::lumped) {
      for (int v : tri) m_trip.emplace_back(v, v, area / 3.0);
    } else {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m_trip.emplace_back(tri[a], tri[b], area / (a == b ? 6.0 : 12.0));
    }
  }
  OperatorPair ops;
  ops.mass_kind = mass_kind;
  ops.stiffness.resize(nv, nv);
  ops.stiffness.setFromTriplets(s_trip.begin(), s_trip.end());
  ops.mass.resize(nv, nv);
  ops.mass.setFromTriplets(m_trip.begin(), m_trip.end());
  ops.stiffness.makeCompressed();
  ops.mass.makeCompressed();
  return ops;
}

struct EigenPair {
  int index = 0;
  double eigenvalue = 0.0;
  Eigen::VectorXd coefficients;  // mass-normalized
  Parity parity = Parity::none;
  double residual = 0.0;

  /// Semiclassical parameter h = lambda^{-1/2}.
  double semiclassical_h() const { return 1.0 / std::sqrt(eigenvalue); }
};

struct SolverOptions {
  std::uint64_t seed = 0x6e6f64616cULL;
  int max_iterations = 2000;
  /// Problems with at most this many unknowns are solved densely.
  int dense_threshold = 400;
  /// Extra block vectors carried beyond k (default max(20, k/2)).
  int guard_vectors = -1;
};

namespace detail {

// ||S x - lambda M x|| / (lambda ||M x||), with lambda floored at `floor`.
inline double relative_residual(const SparseMatrix& s, const SparseMatrix& m, const Eigen::VectorXd& x,
                                double lambda, double floor) {
  const Eigen::VectorXd mx = m * x;
  const Eigen::VectorXd r = s * x - lambda * mx;
  return r.norm() / (std::max(lambda, floor) * mx.norm());
}

// Deterministic sign: the largest-magnitude entry (lowest index among
// near-ties) is made positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= top * (1.0 - 1e-9)) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

// Orthonormalize the columns of y in the mass inner product (two passes of
// Cholesky QR, falling back to modified Gram-Schmidt when the Gram matrix is
// numerically singular).
inline Eigen::MatrixXd mass_orthonormalize(const Eigen::MatrixXd& y, const SparseMatrix& m, std::mt19937_64& rng) {
  Eigen::MatrixXd q = y;
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd g = q.transpose() * (m * q);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (g + g.transpose()));
    const bool ok = llt.info() == Eigen::Success &&
                    llt.matrixL().toDenseMatrix().diagonal().minCoeff() >
                        1e-7 * llt.matrixL().toDenseMatrix().diagonal().maxCoeff();
    if (ok) {
      q = llt.matrixU().solve<Eigen::OnTheRight>(q);
      continue;
    }
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      for (int attempt = 0; attempt < 3; ++attempt) {
        Eigen::VectorXd col = q.col(j);
        for (int re = 0; re < 2; ++re)
          for (Eigen::Index i = 0; i < j; ++i) col -= q.col(i).dot(m * col) * q.col(i);
        const double nrm = std::sqrt(std::max(0.0, col.dot(m * col)));
        if (nrm > 1e-10 * std::sqrt(std::max(1e-300, q.col(j).dot(m * q.col(j))))) {
          q.col(j) = col / nrm;
          break;
        }
        for (Eigen::Index i = 0; i < q.rows(); ++i) q(i, j) = unit(rng);
      }
    }
  }
  return q;
}

}  // namespace detail

/// The k smallest eigenpairs of S v = lambda M v, mass-orthonormal, each with
/// relative residual <= tol. Block shift-invert subspace iteration with
/// Rayleigh-Ritz (dense generalized solve for small problems); the random
/// start block is drawn from a fixed seed. Throws Error{BadK, NoConvergence}.
inline std::vector<EigenPair> solve_eigenpairs(const OperatorPair& ops, int k, double tol,
                                               const SolverOptions& options = {}) {
  const int n = static_cast<int>(ops.stiffness.rows());
  if (k < 1 || k >= n)
    throw Error(ErrorCode::BadK, "k must satisfy 1 <= k < " + std::to_string(n) + ", got " + std::to_string(k));
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "solver tolerance must be positive");

  const double spectral_scale = ops.stiffness.diagonal().sum() / ops.mass.diagonal().sum();
  const double floor = 1e-4 * spectral_scale;

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (n <= options.dense_threshold) {
    const Eigen::MatrixXd s = Eigen::MatrixXd(ops.stiffness);
    const Eigen::MatrixXd m = Eigen::MatrixXd(ops.mass);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, m);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "dense generalized eigensolver failed");
    values = es.eigenvalues().head(k);
    vectors = es.eigenvectors().leftCols(k);
  } else {
    const int guard = options.guard_vectors >= 0 ? options.guard_vectors : std::max(20, k / 2);
    const int p = std::min(n, k + guard);
    const double shift = floor;
    const SparseMatrix shifted = ops.stiffness + shift * ops.mass;
    Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
    if (factor.info() != Eigen::Success)
      throw Error(ErrorCode::NoConvergence, "factorization of the shifted operator failed");

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) x(i, j) = unit(rng);
    x = detail::mass_orthonormalize(x, ops.mass, rng);

    bool converged = false;
    for (int it = 0; it < options.max_iterations && !converged; ++it) {
      const Eigen::MatrixXd mx = ops.mass * x;
      Eigen::MatrixXd y(n, p);
      parallel_for(p, [&](int j) { y.col(j) = factor.solve(mx.col(j)); });
      const Eigen::MatrixXd q = detail::mass_orthonormalize(y, ops.mass, rng);
      const Eigen::MatrixXd h = q.transpose() * (ops.stiffness * q);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
      x = q * es.eigenvectors();
      values = es.eigenvalues();
      converged = true;
      for (int j = 0; j < k && converged; ++j)
        converged = detail::relative_residual(ops.stiffness, ops.mass, x.col(j), values[j], floor) <= tol;
    }
    if (!converged)
      throw Error(ErrorCode::NoConvergence,
                  "subspace iteration did not reach tolerance in " + std::to_string(options.max_iterations) +
                      " iterations");
    values = values.head(k).eval();
    vectors = x.leftCols(k);
  }

  std::vector<EigenPair> pairs(k);
  for (int j = 0; j < k; ++j) {
    auto& pr = pairs[j];
    pr.index = j;
    pr.coefficients = vectors.col(j);
    pr.coefficients /= std::sqrt(pr.coefficients.dot(ops.mass * pr.coefficients));
    detail::fix_sign(pr.coefficients);
    pr.eigenvalue = std::max(0.0, values[j]);
    pr.residual = detail::relative_residual(ops.stiffness, ops.mass, pr.coefficients, pr.eigenvalue, floor);
    if (pr.residual > tol)
      throw Error(ErrorCode::NoConvergence, "eigenpair " + std::to_string(j) + " residual " +
                                                std::to_string(pr.residual) + " exceeds tolerance");
  }
  return pairs;
}

/// Default relative cluster width for parity splitting.
inline constexpr double kClusterRelTol = 1e-6;

/// Length of the prefix of `pairs` obtained by dropping the trailing cluster,
/// which may continue past the computed range.
inline int complete_cluster_prefix(const std::vector<EigenPair>& pairs, double cluster_rel_tol = kClusterRelTol) {
  int n = static_cast<int>(pairs.size());
  while (n > 1 &&
         pairs[n - 1].eigenvalue - pairs[n - 2].eigenvalue < cluster_rel_tol * (1.0 + pairs[n - 2].eigenvalue))
    --n;
  return n - 1;
}

/// Splits each numerically degenerate eigenvalue cluster (gap < cluster_rel_tol * (1 + lambda))
/// into mass-orthonormal even and odd vectors via the projectors (I +- sigma^*)/2.
/// Within a cluster, even vectors come first, each parity block ordered by Rayleigh quotient.
/// Throws Error{MixedParityResidual} when a cluster is not closed under sigma.
inline std::vector<EigenPair> split_parity(const std::vector<EigenPair>& pairs, const Involution& inv,
                                           const OperatorPair& ops, double cluster_rel_tol = kClusterRelTol) {
  std::vector<EigenPair> out;
  out.reserve(pairs.size());
  const double floor = 1e-4 * ops.stiffness.diagonal().sum() / ops.mass.diagonal().sum();
  const int n = static_cast<int>(ops.mass.rows());

  std::size_t begin = 0;
  while (begin < pairs.size()) {
    std::size_t end = begin + 1;
    while (end < pairs.size() &&
           pairs[end].eigenvalue - pairs[end - 1].eigenvalue < cluster_rel_tol * (1.0 + pairs[end - 1].eigenvalue))
      ++end;
    const int c = static_cast<int>(end - begin);

    Eigen::MatrixXd even(n, c), odd(n, c);
    for (int j = 0; j < c; ++j) {
      const Eigen::VectorXd& v = pairs[begin + j].coefficients;
      for (int i = 0; i < n; ++i) {
        even(i, j) = 0.5 * (v[i] + v[inv(i)]);
        odd(i, j) = 0.5 * (v[i] - v[inv(i)]);
      }
    }

    auto parity_block = [&](const Eigen::MatrixXd& proj, Parity parity) {
      const Eigen::MatrixXd g = proj.transpose() * (ops.mass * proj);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
      for (int i = 0; i < c; ++i) {
        const double mu = es.eigenvalues()[i];
        if (mu > 1e-6 && mu < 1.0 - 1e-6)
          throw Error(ErrorCode::MixedParityResidual,
                      "cluster at lambda=" + std::to_string(pairs[begin].eigenvalue) +
                          " is not closed under the involution (projection weight " + std::to_string(mu) + ")");
      }
      std::vector<int> keep;
      for (int i = 0; i < c; ++i)
        if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
      if (keep.empty()) return;
      Eigen::MatrixXd basis(n, keep.size());
      for (std::size_t i = 0; i < keep.size(); ++i)
        basis.col(i) = proj * es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()[keep[i]]);
      // Rayleigh-Ritz inside the parity block.
      const Eigen::MatrixXd h = basis.transpose() * (ops.stiffness * basis);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(0.5 * (h + h.transpose()));
      const Eigen::MatrixXd rotated = basis * rr.eigenvectors();
      for (Eigen::Index i = 0; i < rotated.cols(); ++i) {
        EigenPair pr;
        pr.coefficients = rotated.col(i);
        pr.coefficients /= std::sqrt(pr.coefficients.dot(ops.mass * pr.coefficients));
        detail::fix_sign(pr.coefficients);
        pr.eigenvalue = std::max(0.0, pr.coefficients.dot(ops.stiffness * pr.coefficients));
        pr.parity = parity;
        pr.residual = detail::relative_residual(ops.stiffness, ops.mass, pr.coefficients, pr.eigenvalue, floor);
        out.push_back(std::move(pr));
      }
    };
    const std::size_t before = out.size();
    parity_block(even, Parity::even);
    parity_block(odd, Parity::odd);
    if (out.size() - before != static_cast<std::size_t>(c))
      throw Error(ErrorCode::MixedParityResidual, "parity split changed the cluster dimension");
    begin = end;
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j].index = static_cast<int>(j);
  return out;
}

/// max_i |v_i| over vertex coefficients.
inline double sup_norm(const EigenPair& pair) { return pair.coefficients.cwiseAbs().maxCoeff(); }

/// ||sigma^* v - v|| (even) or ||sigma^* v + v|| (odd), max norm.
inline double symmetry_defect(const EigenPair& pair, const Involution& inv) {
  const double sign = pair.parity == Parity::odd ? -1.0 : 1.0;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < pair.coefficients.size(); ++i)
    worst = std::max(worst, std::abs(pair.coefficients[inv(static_cast<int>(i))] - sign * pair.coefficients[i]));
  return worst;
}

}  // namespace nodal_atlas
