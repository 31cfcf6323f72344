#pragma once

// Topology coordinates and topology-preserving maps from full or partially
// observed virtual-coordinate matrices.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/lowrank.hpp"
#include "hoptopo/sampling.hpp"

namespace hoptopo {

/// n x k topology coordinates, k in {2, 3}.
struct TopologyMap {
  Eigen::MatrixXd coords;

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(coords.cols()); }
};

enum class TpmProcedure {
  kGrammian,     ///< double-center, complete S, first k components
  kPCompletion,  ///< complete P, components 2..k+1
};

namespace detail {

inline void check_dims(std::size_t k) {
  require(k == 2 || k == 3, "map dimension must be 2 or 3");
}

/// Columns [first, first + k) of U diag(S).
inline TopologyMap components(const Eigen::MatrixXd& m, Eigen::Index first,
                              std::size_t k) {
  require(m.cols() >= first + static_cast<Eigen::Index>(k),
          "matrix has " + std::to_string(m.cols()) + " columns, need " +
              std::to_string(first + static_cast<Eigen::Index>(k)));
  SvdFactors f = svd(m);
  TopologyMap t;
  t.coords = f.U.middleCols(first, static_cast<Eigen::Index>(k)) *
             f.S.segment(first, static_cast<Eigen::Index>(k)).asDiagonal();
  return t;
}

inline void require_converged(const CompletionResult& r, const char* what) {
  if (!r.converged) {
    throw ConvergenceError(std::string(what) + ": completion did not converge",
                           r.iterations, r.final_residual);
  }
}

inline void require_usable_mask(const ObservedMatrix& o) {
  MaskReport rep = validate_mask(o);
  require(rep.ok(), "observation mask unusable: " + rep.summary());
}

}  // namespace detail

/// Map from a complete P: columns 2..k+1 of U diag(S). The first component
/// tracks the mean hop distance and is dropped.
inline TopologyMap tpm_full_vc(const Eigen::MatrixXd& p, std::size_t k) {
  detail::check_dims(k);
  detail::require(p.cols() > static_cast<Eigen::Index>(k),
                  "need more than k anchors for a k-D map");
  return detail::components(p, 1, k);
}

inline TopologyMap tpm_full_vc(const VcMatrix& p, std::size_t k) {
  return tpm_full_vc(p.to_dense(), k);
}

/// Completes P, then takes components 2..k+1. Throws ConvergenceError when
/// the completion stops at max_iters.
inline TopologyMap tpm_via_p_completion(const ObservedMatrix& o, std::size_t k,
                                        const CompletionConfig& cfg = {},
                                        CompletionResult* diagnostics = nullptr) {
  detail::check_dims(k);
  detail::require_usable_mask(o);
  CompletionResult r = complete_nuclear_norm(o, cfg);
  detail::require_converged(r, "P completion");
  TopologyMap t = tpm_full_vc(r.L, k);
  if (diagnostics) *diagnostics = std::move(r);
  return t;
}

/// Double-centers the observed squared distances, completes the resulting
/// Grammian-like S, then takes its first k components.
inline TopologyMap tpm_via_grammian(const ObservedMatrix& o, std::size_t k,
                                    const CompletionConfig& cfg = {},
                                    CompletionResult* diagnostics = nullptr) {
  detail::check_dims(k);
  detail::require_usable_mask(o);
  ObservedMatrix s = double_center_partial(o);
  CompletionResult r = complete_nuclear_norm(s, cfg);
  detail::require_converged(r, "Grammian completion");
  TopologyMap t = detail::components(r.L, 0, k);
  if (diagnostics) *diagnostics = std::move(r);
  return t;
}

inline TopologyMap build_tpm(TpmProcedure proc, const ObservedMatrix& o,
                             std::size_t k, const CompletionConfig& cfg = {},
                             CompletionResult* diagnostics = nullptr) {
  return proc == TpmProcedure::kGrammian
             ? tpm_via_grammian(o, k, cfg, diagnostics)
             : tpm_via_p_completion(o, k, cfg, diagnostics);
}

/// a -> scale * a * rotation + translation.
struct Alignment {
  TopologyMap aligned;
  Eigen::MatrixXd rotation;  ///< k x k orthogonal, reflections allowed
  double scale = 1;
  Eigen::RowVectorXd translation;
  double residual = 0;       ///< sum of squared point distances after alignment
};

/// Similarity Procrustes fit of `a` onto `b`. Throws DataError when `a` has
/// all points coincident.
inline Alignment align_maps(const TopologyMap& a, const TopologyMap& b) {
  detail::require(a.size() == b.size() && a.dims() == b.dims(),
                  "maps must have equal shape");
  detail::require(a.size() > 0, "empty map");
  const Eigen::RowVectorXd ma = a.coords.colwise().mean();
  const Eigen::RowVectorXd mb = b.coords.colwise().mean();
  const Eigen::MatrixXd ca = a.coords.rowwise() - ma;
  const Eigen::MatrixXd cb = b.coords.rowwise() - mb;
  const double sa = ca.squaredNorm();
  if (sa <= 1e-300) detail::fail("cannot align a degenerate (single-point) map");

  SvdFactors f = svd(ca.transpose() * cb);
  Alignment al;
  al.rotation = f.U * f.V.transpose();
  al.scale = f.S.sum() / sa;
  al.translation = mb - al.scale * ma * al.rotation;
  al.aligned.coords = (al.scale * a.coords * al.rotation).rowwise() + al.translation;
  al.residual = (al.aligned.coords - b.coords).squaredNorm();
  return al;
}

}  // namespace hoptopo
