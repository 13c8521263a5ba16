#pragma once

#include <Eigen/Dense>
#include <vector>

#include "riloc/channel.hpp"
#include "riloc/geometry.hpp"

namespace riloc {

/// Inverse of a symmetric positive definite matrix. The matrix is
/// equilibrated by its diagonal before factorization, so inputs whose
/// rows mix units of wildly different scale (radians vs seconds) invert
/// at full precision. Throws NumericalError(context) when the input is
/// not positive definite.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* context);

/// Fisher information of the 8 channel parameters for the Gaussian model
/// with per-subcarrier noise variance sigma2:
/// J = (2/sigma2) sum_l Re(J_l^H J_l), summed in block order.
Mat8 channel_fim(const std::vector<Eigen::MatrixXcd>& jacobians,
                 double noise_variance_w);

/// Information remaining about the leading four (geometric) parameters
/// after eliminating the four gain parameters: X - Y Z^-1 Y' for the
/// partition J = [[X, Y], [Y', Z]]. Throws NumericalError when the gain
/// block is singular or has condition number above 1e12.
Mat4 eliminate_nuisance(const Mat8& fim);

/// Covariance of an efficient channel estimator: the inverse of the
/// reduced information matrix, symmetrized. Throws NumericalError when
/// the information is not positive definite.
Mat4 channel_param_covariance(const Mat4& reduced_fim);

/// Classical position error bound sqrt(tr([(G' Sigma^-1 G)^-1]_{3x3}))
/// with G the location Jacobian at `ue` under the true geometry.
/// Throws NumericalError when the position is unobservable.
double position_error_bound(const UEState& ue, const RisGeometry& true_geom,
                            const Mat4& sigma);

}  // namespace riloc
