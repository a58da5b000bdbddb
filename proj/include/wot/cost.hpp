#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "wot/measure.hpp"
#include "wot/norms.hpp"

namespace wot {

using Matrix = Eigen::MatrixXd;

enum class GroundNorm { sobolev, lp, linf, warped_sup };

/// Transport cost c(x,y) = N(x - y)^power for a ground norm N.
///
/// The squared kinds are what the Wasserstein-2 experiments minimize; the
/// sobolev kind uses power = p; power 1 gives the metric itself.
class CostSpec {
 public:
  static CostSpec sobolev_p(double p, const SobolevParams& params, const QuadratureSpec& quad = {}) {
    CostSpec c(GroundNorm::sobolev, 2.0, p);
    c.params_ = params;
    c.quad_ = quad;
    quad.validate();
    return c;
  }
  static CostSpec lp_squared(double p) { return CostSpec(GroundNorm::lp, p, 2.0); }
  static CostSpec linf_squared() { return CostSpec(GroundNorm::linf, std::numeric_limits<double>::infinity(), 2.0); }
  /// |A(x-y)|_inf^2 for an invertible matrix A.
  static CostSpec warped_sup(const Matrix& warp) {
    if (warp.rows() != warp.cols() || warp.rows() == 0) throw std::invalid_argument("warped_sup: warp must be square");
    Eigen::FullPivLU<Matrix> lu(warp);
    if (!lu.isInvertible()) throw std::invalid_argument("warped_sup: warp matrix must be invertible");
    CostSpec c(GroundNorm::warped_sup, std::numeric_limits<double>::infinity(), 2.0);
    c.warp_ = warp;
    return c;
  }
  /// |x - y|_p itself (power one); p may be infinity.
  static CostSpec lp_metric(double p) {
    return CostSpec(std::isinf(p) ? GroundNorm::linf : GroundNorm::lp, p, 1.0);
  }

  /// Same ground norm raised to another power.
  CostSpec with_power(double power) const {
    CostSpec c = *this;
    c.power_ = check_power(power);
    return c;
  }

  GroundNorm norm() const { return norm_; }
  double p() const { return p_; }
  double power() const { return power_; }
  const std::optional<SobolevParams>& sobolev_params() const { return params_; }
  const QuadratureSpec& quadrature() const { return quad_; }
  const Matrix& warp() const { return warp_; }
  bool is_metric() const { return power_ == 1.0; }

  double distance(const Vec& x, const Vec& y) const {
    if (x.size() != y.size()) throw std::invalid_argument("CostSpec: dimension mismatch between points");
    Vec diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
    switch (norm_) {
      case GroundNorm::lp:
      case GroundNorm::linf:
        return lp_norm(diff, p_);
      case GroundNorm::warped_sup: {
        if (static_cast<Eigen::Index>(diff.size()) != warp_.cols()) {
          throw std::invalid_argument("CostSpec: warp matrix does not match point dimension");
        }
        const Eigen::VectorXd v = warp_ * Eigen::Map<const Eigen::VectorXd>(diff.data(), static_cast<Eigen::Index>(diff.size()));
        return v.cwiseAbs().maxCoeff();
      }
      case GroundNorm::sobolev:
        break;
    }
    throw std::invalid_argument("CostSpec: the Sobolev cost is defined on paths, not vectors");
  }

  double distance(const DyadicPath& x, const DyadicPath& y) const {
    switch (norm_) {
      case GroundNorm::sobolev:
        return sobolev_norm(x - y, *params_, quad_);
      case GroundNorm::linf:
        return sup_norm(x - y);
      default:
        break;
    }
    throw std::invalid_argument("CostSpec: " + name() + " is not defined on paths");
  }

  template <class Point>
  double operator()(const Point& x, const Point& y) const {
    const double d = distance(x, y);
    if (power_ == 1.0) return d;
    if (power_ == 2.0) return d * d;
    return std::pow(d, power_);
  }

  std::string name() const {
    std::ostringstream os;
    switch (norm_) {
      case GroundNorm::sobolev:
        os << "sobolev_p(p=" << power_ << ",k=" << params_->k() << ",gamma=" << params_->gamma() << ")";
        return os.str();
      case GroundNorm::lp:
        os << "lp(p=" << p_ << ")";
        break;
      case GroundNorm::linf:
        os << "linf";
        break;
      case GroundNorm::warped_sup:
        os << "warped_sup";
        break;
    }
    if (power_ != 1.0) os << "^" << power_;
    return os.str();
  }

 private:
  CostSpec(GroundNorm norm, double p, double power) : norm_(norm), p_(p), power_(check_power(power)) {
    if (!(p >= 1.0)) throw std::invalid_argument("CostSpec: p must be >= 1");
  }

  static double check_power(double power) {
    if (!(power >= 1.0) || !std::isfinite(power)) throw std::invalid_argument("CostSpec: exponent must be >= 1");
    return power;
  }

  GroundNorm norm_;
  double p_;
  double power_;
  std::optional<SobolevParams> params_;
  QuadratureSpec quad_;
  Matrix warp_;
};

/// c_ij = c(x_i, y_j).
template <class Point>
Matrix build_cost_matrix(const DiscreteMeasure<Point>& mu0, const DiscreteMeasure<Point>& mu1, const CostSpec& cost) {
  const auto m = static_cast<Eigen::Index>(mu0.size());
  const auto n = static_cast<Eigen::Index>(mu1.size());
  if (m > 0 && n > 0 && dimension_of(mu0.point(0)) != dimension_of(mu1.point(0)) &&
      !std::is_same_v<Point, DyadicPath>) {
    throw std::invalid_argument("build_cost_matrix: ground dimensions differ");
  }
  Matrix c(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c(i, j) = cost(mu0.point(i), mu1.point(j));
  }
  return c;
}

}  // namespace wot
