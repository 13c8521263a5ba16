#pragma once

#include "riloc/fim.hpp"
#include "riloc/geometry.hpp"
#include "riloc/solver.hpp"

namespace riloc {

/// Closed-form pseudo-true solution with its construction quantities and
/// self-consistency diagnostics. The position solves the intersection of
/// the believed departure ray with the hyperboloid of constant believed
/// delay difference; the clock bias then follows from the direct path.
struct PseudoTrue {
  UEState state;

  // Construction quantities, all under the believed (mismatched) anchors.
  Vec3 line_direction;     // believed departure ray direction, unnormalized
  double path_offset_m;    // reflected-path length surplus of the believed
                           // surface position over the true one
  double range_diff_m;     // surface-minus-bs range difference defining the
                           // hyperboloid sheet; either sign can occur
  double line_scale;       // position = line_scale * direction + surface pos

  // Diagnostics. All must be ~0 for a valid solution.
  Vec4 residual;                  // observed minus reproduced parameters
  double line_distance_m;         // distance of the solution from the ray
  double hyperboloid_residual_m;  // sheet equation violation
  double clock_consistency_s;     // direct vs reflected clock recovery gap
};

/// Divergence between the models of the channel estimate at the true
/// state (true anchors) and at state r (believed anchors):
/// 0.5 h' Sigma^-1 h with h the parameter difference, azimuth wrapped.
double kld(const UEState& r, const UEState& truth,
           const RisGeometry& true_geom, const RisGeometry& assumed_geom,
           const Mat4& sigma);

/// Exact divergence minimizer. Weight-independent because the divergence
/// reaches zero. Throws NumericalError on a vanishing intersection
/// denominator ("degenerate intersection"), a solution behind the
/// surface ("intersection behind surface"), or failed self-consistency.
PseudoTrue pseudo_true_closed_form(const UEState& truth,
                                   const RisGeometry& true_geom,
                                   const RisGeometry& assumed_geom);

/// Iterative divergence minimizer: damped Gauss-Newton on the parameter
/// residual with Sigma^-1 weighting, step tolerance 1e-12 m. Serves as an
/// independent cross-check of the closed form.
FitResult pseudo_true_numerical(const UEState& truth,
                                const RisGeometry& true_geom,
                                const RisGeometry& assumed_geom,
                                const Mat4& sigma, const UEState& init);

/// Curvature of the expected log-likelihood of the believed model at r0:
/// [A]_ij = sum_m H_m(i,j) [Sigma^-1 h]_m - [G' Sigma^-1 G]_ij,
/// with h = eta_true - g(r0), derivatives under the believed anchors.
/// Negative definite near a divergence minimizer.
Mat4 mismatch_curvature(const UEState& r0, const RisGeometry& assumed_geom,
                        const Mat4& sigma, const Vec4& eta_true);

/// Covariance of the believed-model score at r0:
/// B = G' Sigma^-1 (Sigma + h h') Sigma^-1 G.
Mat4 score_covariance(const UEState& r0, const RisGeometry& assumed_geom,
                      const Mat4& sigma, const Vec4& eta_true);

/// Misspecification lower bound assembled from its pieces, with the
/// classical mismatch-free bound attached for comparison.
struct BoundReport {
  Mat4 mcrb;        // A^-1 B A^-1
  Mat4 bias_outer;  // (r_true - r0)(r_true - r0)'
  Mat4 lbm;         // mcrb + bias_outer
  double lb_m;               // sqrt(tr(lbm position block))
  double peb_m;              // classical bound at the true state
  double bias_norm_pos_m;    // |p_true - p0|
};

/// Throws NumericalError("MCRB undefined") when the curvature is singular.
BoundReport bound_report(const UEState& truth, const UEState& r0,
                         const Mat4& curvature, const Mat4& score_cov,
                         const Mat4& sigma, const RisGeometry& true_geom);

}  // namespace riloc
