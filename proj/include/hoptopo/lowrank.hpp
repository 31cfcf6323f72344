#pragma once

// Dense low-rank machinery: SVD with a fixed sign convention, normalized
// singular spectra, double centering of squared distances (fully and
// partially observed), and nuclear-norm matrix completion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "hoptopo/error.hpp"
#include "hoptopo/rng.hpp"
#include "hoptopo/sampling.hpp"

// OpenBLAS introspection, resolved only when OpenBLAS is the LAPACK backend.
extern "C" {
__attribute__((weak)) char* openblas_get_corename();
__attribute__((weak)) char* openblas_get_config();
__attribute__((weak)) void gotoblas_dynamic_init();
__attribute__((weak)) void gotoblas_dynamic_quit();
}

namespace hoptopo {

/// Singular values above this fraction of the largest count toward rank.
inline constexpr double kRankTolerance = 1e-10;

/// Thin SVD: m = U diag(S) V^T with S descending. Each left singular vector
/// is oriented so its largest-magnitude entry is nonnegative (first such
/// entry on ties), and the matching right vector is flipped with it.
struct SvdFactors {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;

  std::size_t rank(double rel_tol = kRankTolerance) const {
    if (S.size() == 0 || S(0) <= 0) return 0;
    return static_cast<std::size_t>((S.array() > rel_tol * S(0)).count());
  }

  Eigen::MatrixXd reconstruct() const { return U * S.asDiagonal() * V.transpose(); }

  /// U diag(S): the principal components.
  Eigen::MatrixXd scores() const { return U * S.asDiagonal(); }
};

namespace detail {

/// OpenBLAS 0.3.20 dispatches to Cooperlake GEMM kernels that return wrong
/// products for mid-sized shapes (k ~ 100), which corrupts dgesdd/dsyevd.
/// The SkylakeX kernels are a safe subset on that hardware, so the kernel
/// table is re-selected once, before the first LAPACK call.
inline void ensure_blas_kernels() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (!openblas_get_corename || !openblas_get_config || !gotoblas_dynamic_init ||
        !gotoblas_dynamic_quit) {
      return;
    }
    if (std::getenv("OPENBLAS_CORETYPE")) return;  // user's choice wins
    const char* core = openblas_get_corename();
    const char* config = openblas_get_config();
    if (!core || !config || std::strcmp(core, "Cooperlake") != 0 ||
        !std::strstr(config, "OpenBLAS 0.3.20 ")) {
      return;
    }
    ::setenv("OPENBLAS_CORETYPE", "SkylakeX", 1);
    gotoblas_dynamic_quit();
    gotoblas_dynamic_init();
    ::unsetenv("OPENBLAS_CORETYPE");
  });
}

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) fail(std::string(what) + ": non-finite entries");
}

inline void orient_columns(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  for (Eigen::Index k = 0; k < u.cols(); ++k) {
    Eigen::Index arg = 0;
    double best = -1;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      double a = std::abs(u(i, k));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, k) < 0) {
      u.col(k) *= -1;
      v.col(k) *= -1;
    }
  }
}

/// Eigenpairs of a symmetric matrix, ascending eigenvalues.
inline void symmetric_eigen(const Eigen::MatrixXd& a, Eigen::VectorXd& w,
                            Eigen::MatrixXd& vecs) {
  const auto n = static_cast<lapack_int>(a.rows());
  ensure_blas_kernels();
  vecs = a;
  w.resize(n);
  if (n == 0) return;
  lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vecs.data(), n, w.data());
  if (info != 0) fail("symmetric eigensolver failed, info=" + std::to_string(info));
}

}  // namespace detail

inline SvdFactors svd(const Eigen::MatrixXd& m) {
  detail::require_finite(m, "svd");
  detail::ensure_blas_kernels();
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  const lapack_int r = std::min(rows, cols);
  SvdFactors f;
  if (r == 0) {
    f.U.resize(rows, 0);
    f.V.resize(cols, 0);
    return f;
  }
  Eigen::MatrixXd a = m;
  f.U.resize(rows, r);
  f.S.resize(r);
  Eigen::MatrixXd vt(r, cols);
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, a.data(),
                                   rows, f.S.data(), f.U.data(), rows,
                                   vt.data(), r);
  if (info != 0) detail::fail("SVD failed to converge, info=" + std::to_string(info));
  f.V = vt.transpose();
  detail::orient_columns(f.U, f.V);
  return f;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  detail::require_finite(m, "singular_values");
  detail::ensure_blas_kernels();
  const auto rows = static_cast<lapack_int>(m.rows());
  const auto cols = static_cast<lapack_int>(m.cols());
  Eigen::MatrixXd a = m;
  Eigen::VectorXd s(std::min(rows, cols));
  if (s.size() == 0) return s;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, a.data(),
                                   rows, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) detail::fail("SVD failed to converge, info=" + std::to_string(info));
  return s;
}

inline std::size_t numerical_rank(const Eigen::MatrixXd& m,
                                  double rel_tol = kRankTolerance) {
  Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0 || s(0) <= 0) return 0;
  return static_cast<std::size_t>((s.array() > rel_tol * s(0)).count());
}

/// Largest singular value by power iteration on m^T m.
inline double spectral_norm(const Eigen::MatrixXd& m, int max_iters = 300) {
  if (m.size() == 0) return 0;
  Rng rng(0x5eedULL);
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(0.5, 1.5);
  v.normalize();
  double sigma = 0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = m.transpose() * (m * v);
    double norm = w.norm();
    if (norm == 0) return 0;
    double next = std::sqrt(norm);
    v = w / norm;
    if (std::abs(next - sigma) <= 1e-12 * next) return next;
    sigma = next;
  }
  return sigma;
}

/// Double centering of the elementwise square of `distances`:
///   S = -1/2 (D - colmeans - rowmeans + grandmean),  D = distances.^2.
/// Works on rectangular inputs with row means over columns and column means
/// over rows.
inline Eigen::MatrixXd double_center_full(const Eigen::MatrixXd& distances) {
  detail::require(distances.size() > 0, "double centering of an empty matrix");
  const Eigen::MatrixXd d = distances.array().square().matrix();
  const double rows = static_cast<double>(d.rows());
  const double cols = static_cast<double>(d.cols());
  const Eigen::RowVectorXd col_mean = d.colwise().sum() / rows;
  const Eigen::VectorXd row_mean = d.rowwise().sum() / cols;
  const double grand = d.sum() / (rows * cols);
  Eigen::MatrixXd s(d.rows(), d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      s(i, j) = -0.5 * (d(i, j) - col_mean(j) - row_mean(i) + grand);
    }
  }
  return s;
}

/// Same transform with every mean taken over observed entries only; the mask
/// is unchanged. Throws DataError on an empty row or column.
inline ObservedMatrix double_center_partial(const ObservedMatrix& o) {
  const MaskReport rep = validate_mask(o);
  detail::require(rep.empty_rows.empty() && rep.empty_cols.empty(),
                  "double centering needs every row and column observed: " +
                      rep.summary());
  const auto rows = o.values.rows(), cols = o.values.cols();
  const Eigen::MatrixXd d = o.mask.select(o.values.array().square(), 0.0).matrix();
  const Eigen::RowVectorXd col_count = o.mask.cast<double>().colwise().sum().matrix();
  const Eigen::VectorXd row_count = o.mask.cast<double>().rowwise().sum().matrix();
  const Eigen::RowVectorXd col_mean = d.colwise().sum().cwiseQuotient(col_count);
  const Eigen::VectorXd row_mean = d.rowwise().sum().cwiseQuotient(row_count);
  const double grand = d.sum() / static_cast<double>(o.observed());
  ObservedMatrix out = o;
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      out.values(i, j) =
          o.mask(i, j) ? -0.5 * (d(i, j) - col_mean(j) - row_mean(i) + grand) : 0.0;
    }
  }
  return out;
}

/// Singular values divided by the largest. With `center`, the matrix is
/// first double-centered as squared distances.
inline Eigen::VectorXd normalized_spectrum(const Eigen::MatrixXd& m, bool center) {
  detail::require(m.size() > 0, "spectrum of an empty matrix");
  Eigen::VectorXd s = singular_values(center ? double_center_full(m) : m);
  if (s(0) <= 0) detail::fail("spectrum of an all-zero matrix");
  return s / s(0);
}

struct CompletionConfig {
  double tolerance = 1e-6;        ///< relative Frobenius residual on the mask
  std::size_t max_iters = 500;
  double penalty_growth = 1.05;   ///< mu_{k+1} = growth * mu_k
  double initial_penalty = 0.0;   ///< 0: 1 / ||P_mask(M)||_2
};

struct CompletionTraceRow {
  std::size_t iteration;
  double residual;
  double nuclear_norm;
};

struct CompletionResult {
  Eigen::MatrixXd L;
  std::size_t iterations = 0;
  double final_residual = 0;
  bool converged = false;
  std::vector<CompletionTraceRow> trace;
};

/// Nuclear-norm minimization subject to agreement on the mask, solved by the
/// inexact augmented Lagrange multiplier method:
///
///   A_k   = shrink(X_k, 1/mu_k)           singular value soft-threshold
///   X_k+1 = P_mask(M + Y_k+1/mu_k+1) + P_unobserved(A_k)
///   Y_k+1 = Y_k + mu_k P_mask(M - A_k)
///
/// Symmetric-mode inputs use an eigendecomposition for the shrinkage and the
/// result is symmetrized. A fully observed input is returned unchanged.
inline CompletionResult complete_nuclear_norm(const ObservedMatrix& o,
                                              const CompletionConfig& cfg = {}) {
  detail::require(cfg.tolerance > 0, "completion tolerance must be positive");
  detail::require(cfg.max_iters >= 1, "max_iters must be at least 1");
  detail::require(cfg.penalty_growth >= 1, "penalty growth must be >= 1");
  detail::require(o.observed() > 0, "completion needs a nonempty mask");
  const MaskReport rep = validate_mask(o);
  detail::require(rep.non_finite == 0, "non-finite observations");
  detail::require(rep.empty_rows.empty() && rep.empty_cols.empty(),
                  "completion needs every row and column observed: " + rep.summary());
  const bool symmetric = o.mode == ObservationMode::kSymmetric;
  if (symmetric) {
    detail::require(rep.asymmetric_cells == 0 && o.rows() == o.cols(),
                    "symmetric-mode observations are not symmetric");
  }

  CompletionResult res;
  const Eigen::MatrixXd d = o.mask.select(o.values, 0.0);
  if (o.fully_observed()) {
    res.L = o.values;
    res.converged = true;
    return res;
  }
  const double norm_d = d.norm();
  if (norm_d == 0) {
    res.L = Eigen::MatrixXd::Zero(d.rows(), d.cols());
    res.converged = true;
    return res;
  }

  double mu = cfg.initial_penalty > 0 ? cfg.initial_penalty : 1.0 / spectral_norm(d);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d.rows(), d.cols());
  Eigen::MatrixXd x = d;
  Eigen::VectorXd w;
  Eigen::MatrixXd vecs;

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const double tau = 1.0 / mu;
    double nuclear = 0;
    if (symmetric) {
      detail::symmetric_eigen(0.5 * (x + x.transpose()), w, vecs);
      std::vector<Eigen::Index> keep;
      for (Eigen::Index k = 0; k < w.size(); ++k) {
        if (std::abs(w(k)) > tau) keep.push_back(k);
      }
      Eigen::MatrixXd vk(d.rows(), static_cast<Eigen::Index>(keep.size()));
      Eigen::VectorXd lk(static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        const double lam = w(keep[c]);
        lk(static_cast<Eigen::Index>(c)) = lam > 0 ? lam - tau : lam + tau;
        vk.col(static_cast<Eigen::Index>(c)) = vecs.col(keep[c]);
        nuclear += std::abs(lk(static_cast<Eigen::Index>(c)));
      }
      a.noalias() = vk * lk.asDiagonal() * vk.transpose();
    } else {
      SvdFactors f = svd(x);
      Eigen::Index k = 0;
      while (k < f.S.size() && f.S(k) > tau) ++k;
      Eigen::VectorXd sk = f.S.head(k).array() - tau;
      nuclear = sk.sum();
      a.noalias() = f.U.leftCols(k) * sk.asDiagonal() * f.V.leftCols(k).transpose();
    }

    // Residual lives on the mask only; off the mask A is free.
    const Eigen::MatrixXd z = o.mask.select(d - a, 0.0);
    y += mu * z;
    mu *= cfg.penalty_growth;
    x = o.mask.select(d + y / mu, a);

    const double residual = z.norm() / norm_d;
    res.trace.push_back({it, residual, nuclear});
    res.iterations = it;
    res.final_residual = residual;
    if (residual <= cfg.tolerance) {
      res.converged = true;
      break;
    }
  }
  res.L = symmetric ? Eigen::MatrixXd(0.5 * (a + a.transpose())) : a;
  return res;
}

}  // namespace hoptopo
