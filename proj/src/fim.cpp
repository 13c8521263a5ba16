#include "riloc/fim.hpp"

#include <cmath>

#include "riloc/errors.hpp"

namespace riloc {

namespace {

// State scaling diag(1, 1, 1, 1/c): maps derivatives w.r.t. (m, m, m, s)
// to derivatives w.r.t. (m, m, m, m), where solves are well conditioned.
Mat4 clock_to_meters() {
  Mat4 s = Mat4::Identity();
  s(3, 3) = 1.0 / kSpeedOfLight;
  return s;
}

}  // namespace

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m, const char* context) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = m(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) throw NumericalError(context);
    scale[i] = 1.0 / std::sqrt(d);
  }
  const Eigen::MatrixXd balanced =
      scale.asDiagonal() * m * scale.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(balanced);
  if (llt.info() != Eigen::Success) throw NumericalError(context);
  Eigen::MatrixXd inv_balanced =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd inv =
      scale.asDiagonal() * inv_balanced * scale.asDiagonal();
  return ((inv + inv.transpose()) / 2.0).eval();
}

Mat8 channel_fim(const std::vector<Eigen::MatrixXcd>& jacobians,
                 double noise_variance_w) {
  if (!(noise_variance_w > 0.0)) {
    throw ConfigError("noise variance must be positive");
  }
  Mat8 fim = Mat8::Zero();
  for (const auto& J : jacobians) {
    if (J.cols() != 8) throw ConfigError("signal Jacobian must have 8 columns");
    fim += (J.adjoint() * J).real();
  }
  fim *= 2.0 / noise_variance_w;
  return ((fim + fim.transpose()) / 2.0).eval();
}

Mat4 eliminate_nuisance(const Mat8& fim) {
  const Mat4 x = fim.topLeftCorner<4, 4>();
  const Mat4 y = fim.topRightCorner<4, 4>();
  const Mat4 z = fim.bottomRightCorner<4, 4>();

  Eigen::SelfAdjointEigenSolver<Mat4> eig(z);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("nuisance block singular");
  }
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw NumericalError("nuisance block singular");
  }
  const Mat4 z_inv_yt =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose() * y.transpose();
  const Mat4 reduced = x - y * z_inv_yt;
  return ((reduced + reduced.transpose()) / 2.0).eval();
}

Mat4 channel_param_covariance(const Mat4& reduced_fim) {
  return spd_inverse(reduced_fim, "eta unidentifiable");
}

double position_error_bound(const UEState& ue, const RisGeometry& true_geom,
                            const Mat4& sigma) {
  const Mat4 weights = spd_inverse(sigma, "covariance not positive definite");
  const Mat4 g_scaled = location_jacobian(ue, true_geom) * clock_to_meters();
  const Mat4 info = g_scaled.transpose() * weights * g_scaled;
  const Mat4 crb = spd_inverse(info, "position unobservable");
  return std::sqrt(crb.topLeftCorner<3, 3>().trace());
}

}  // namespace riloc
