#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "wot/paths.hpp"
#include "wot/quadrature.hpp"

namespace wot {

/// Parameters (k, gamma) of the Sobolev-type path norm
///
///   ||w||_{k,gamma} = ( int int (w(t)-w(s))^{2k} / |t-s|^{1+2k gamma} dt ds )^{1/2k}
///
/// restricted to the admissible region 0 < gamma < 1/2, 2 < 1 + 2k gamma < k.
/// The embedding constant C_{k,gamma} is recomputed on every construction.
class SobolevParams {
 public:
  SobolevParams() : SobolevParams(4, 0.3) {}

  SobolevParams(int k, double gamma) : k_(k), gamma_(gamma) {
    validate(k, gamma);
    c_embed_ = closed_form_constant(k, gamma);
  }

  int k() const { return k_; }
  double gamma() const { return gamma_; }
  double c_embed() const { return c_embed_; }

  /// Even power 2k of the integrand numerator.
  int power() const { return 2 * k_; }
  /// Kernel exponent 1 + 2k gamma.
  double kernel_exponent() const { return 1.0 + 2.0 * k_ * gamma_; }
  /// Exponent k - 1 - 2k gamma of |t-s| in the embedding integral.
  double embedding_exponent() const { return k_ - 1.0 - 2.0 * k_ * gamma_; }

  static void validate(int k, double gamma) {
    std::ostringstream msg;
    if (k < 1) {
      msg << "k = " << k << " must be a positive integer";
      throw std::invalid_argument(msg.str());
    }
    if (!(gamma > 0.0 && gamma < 0.5)) {
      msg << "gamma = " << gamma << " violates the constraint 0<γ<1/2";
      throw std::invalid_argument(msg.str());
    }
    const double e = 1.0 + 2.0 * k * gamma;
    if (!(e > 2.0 && e < static_cast<double>(k))) {
      msg << "(k, gamma) = (" << k << ", " << gamma << ") gives 1+2kγ = " << e
          << ", violating the constraint 2<1+2kγ<k";
      throw std::invalid_argument(msg.str());
    }
  }

  friend bool operator==(const SobolevParams&, const SobolevParams&) = default;

 private:
  static double closed_form_constant(int k, double gamma) {
    const double a = k - 1.0 - 2.0 * k * gamma;
    return std::pow(2.0 / ((a + 1.0) * (a + 2.0)), 1.0 / (2.0 * k));
  }

  int k_;
  double gamma_;
  double c_embed_ = 0.0;
};

/// C_{k,gamma} = (int int |t-s|^{k-1-2k gamma} dt ds)^{1/2k}, using
/// int int |t-s|^a = 2 / ((a+1)(a+2)).
inline double embedding_constant(const SobolevParams& params) { return params.c_embed(); }

struct QuadratureSpec {
  int panels_per_cell = 2;
  int gauss_points = 8;

  void validate() const {
    if (panels_per_cell < 1 || gauss_points < 1) {
      throw std::invalid_argument("QuadratureSpec: panels_per_cell and gauss_points must be >= 1");
    }
  }
  QuadratureSpec refined() const { return {2 * panels_per_cell, gauss_points}; }
};

namespace detail {

inline double ipow(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

/// int int_{[0,h]^2} |t-s|^a dt ds.
inline double diagonal_cell_integral(double h, double a) { return 2.0 * std::pow(h, a + 2.0) / ((a + 1.0) * (a + 2.0)); }

enum class Integrand { energy, derivative };

template <int N>
inline double fixed_pow(double x) {
  if constexpr (N == 0) {
    return 1.0;
  } else if constexpr (N % 2 == 0) {
    const double y = fixed_pow<N / 2>(x);
    return y * y;
  } else {
    return x * fixed_pow<N - 1>(x);
  }
}

struct PanelSums {
  const double* wv;
  const double* hv;
  const double* kernel;
  std::size_t panels;
  std::size_t per_cell;
  std::size_t g;
};

/// Sum over sub-panel pairs u > v lying in different cells. TwoK == 0 means
/// the power is only known at run time.
template <int TwoK>
double off_diagonal_sum(const PanelSums& s, Integrand kind, int runtime_two_k = TwoK) {
  const int two_k = TwoK == 0 ? runtime_two_k : TwoK;
  auto pw = [two_k](double x, int minus) {
    if constexpr (TwoK == 0) {
      return ipow(x, two_k - minus);
    } else {
      return minus == 0 ? fixed_pow<TwoK>(x) : fixed_pow<TwoK - 1>(x);
    }
  };
  const std::size_t g = s.g;
  double off = 0.0;
  for (std::size_t u = 1; u < s.panels; ++u) {
    const std::size_t cu = u / s.per_cell;
    for (std::size_t v = 0; v < u; ++v) {
      if (v / s.per_cell == cu) continue;
      const double* ker = s.kernel + (u - v) * g * g;
      const double* wt = s.wv + u * g;
      const double* ws = s.wv + v * g;
      double acc = 0.0;
      if (kind == Integrand::energy) {
        for (std::size_t a = 0; a < g; ++a) {
          const double x = wt[a];
          const double* row = ker + a * g;
          for (std::size_t b = 0; b < g; ++b) acc += row[b] * pw(x - ws[b], 0);
        }
      } else {
        const double* ht = s.hv + u * g;
        const double* hs = s.hv + v * g;
        for (std::size_t a = 0; a < g; ++a) {
          const double* row = ker + a * g;
          for (std::size_t b = 0; b < g; ++b) acc += row[b] * pw(wt[a] - ws[b], 1) * (ht[a] - hs[b]);
        }
        acc *= two_k;
      }
      off += acc;
    }
  }
  return off;
}

/// Double integral over [0,1]^2 of either (dw)^{2k} or 2k (dw)^{2k-1} dh
/// against |t-s|^{-(1+2k gamma)}, with dw = w(t)-w(s), dh = h(t)-h(s).
///
/// Cells on the diagonal are integrated in closed form: both paths are
/// linear there, so the integrand is slope^{2k} |t-s|^{2k-1-2k gamma}.
/// Off-diagonal cell pairs are split into panels_per_cell^2 sub-panels and
/// integrated with tensor Gauss-Legendre. The kernel only depends on the
/// sub-panel offset, so its values are tabulated once per offset.
inline double sobolev_integral(const DyadicPath& w_in, const DyadicPath& h_in, const SobolevParams& params,
                               const QuadratureSpec& quad, Integrand kind) {
  quad.validate();
  auto [w, h] = common_refinement(w_in, h_in);
  const std::size_t cells = w.cells();
  const auto per_cell = static_cast<std::size_t>(quad.panels_per_cell);
  const std::size_t panels = cells * per_cell;
  const auto g = static_cast<std::size_t>(quad.gauss_points);
  const int two_k = params.power();
  const double beta = params.kernel_exponent();
  const double cell_width = 1.0 / static_cast<double>(cells);
  const double panel_width = cell_width / static_cast<double>(per_cell);

  const GaussLegendreRule rule = gauss_legendre(quad.gauss_points);

  // diagonal cells
  const double diag = diagonal_cell_integral(cell_width, static_cast<double>(two_k) - beta);
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double sw = w.slope(c);
    if (kind == Integrand::energy) {
      total += ipow(sw, two_k) * diag;
    } else {
      total += two_k * ipow(sw, two_k - 1) * h.slope(c) * diag;
    }
  }
  if (cells == 1) return total;

  // path values at every Gauss node of every panel
  std::vector<double> wv(panels * g);
  std::vector<double> hv(kind == Integrand::derivative ? panels * g : 0);
  for (std::size_t u = 0; u < panels; ++u) {
    const std::size_t c = u / per_cell;
    const double sw = w.slope(c);
    const double sh = kind == Integrand::derivative ? h.slope(c) : 0.0;
    for (std::size_t a = 0; a < g; ++a) {
      const double offset = (static_cast<double>(u % per_cell) + rule.nodes[a]) * panel_width;
      wv[u * g + a] = w.knot(c) + sw * offset;
      if (kind == Integrand::derivative) hv[u * g + a] = h.knot(c) + sh * offset;
    }
  }

  // kernel table: kernel[D][a][b] for t in panel u, s in panel u-D
  std::vector<double> kernel(panels * g * g, 0.0);
  for (std::size_t d = 1; d < panels; ++d) {
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = 0; b < g; ++b) {
        const double gap = (static_cast<double>(d) + rule.nodes[a] - rule.nodes[b]) * panel_width;
        kernel[(d * g + a) * g + b] =
            rule.weights[a] * rule.weights[b] * panel_width * panel_width * std::pow(gap, -beta);
      }
    }
  }

  const PanelSums sums{wv.data(), hv.data(), kernel.data(), panels, per_cell, g};
  double off = 0.0;
  switch (two_k) {
    case 2: off = off_diagonal_sum<2>(sums, kind); break;
    case 4: off = off_diagonal_sum<4>(sums, kind); break;
    case 6: off = off_diagonal_sum<6>(sums, kind); break;
    case 8: off = off_diagonal_sum<8>(sums, kind); break;
    case 10: off = off_diagonal_sum<10>(sums, kind); break;
    case 12: off = off_diagonal_sum<12>(sums, kind); break;
    case 14: off = off_diagonal_sum<14>(sums, kind); break;
    case 16: off = off_diagonal_sum<16>(sums, kind); break;
    default: off = off_diagonal_sum<0>(sums, kind, two_k); break;
  }
  return total + 2.0 * off;
}

}  // namespace detail

/// F(w) = ||w||_{k,gamma}^{2k}.
inline double sobolev_energy(const DyadicPath& w, const SobolevParams& params, const QuadratureSpec& quad = {}) {
  return detail::sobolev_integral(w, w, params, quad, detail::Integrand::energy);
}

inline double sobolev_norm(const DyadicPath& w, const SobolevParams& params, const QuadratureSpec& quad = {}) {
  const double f = sobolev_energy(w, params, quad);
  return f <= 0.0 ? 0.0 : std::pow(f, 1.0 / params.power());
}

/// D_h F(w) for F = ||.||^{2k}: 2k int int (dw)^{2k-1} dh / |t-s|^{1+2k gamma}.
inline double sobolev_directional_derivative(const DyadicPath& w, const DyadicPath& h, const SobolevParams& params,
                                             const QuadratureSpec& quad = {}) {
  return detail::sobolev_integral(w, h, params, quad, detail::Integrand::derivative);
}

/// Directional derivative of ||.||^p at w along h, p > 1, by the chain rule
/// (p / 2k) F(w)^{p/2k - 1} D_h F(w); zero at w = 0.
inline double sobolev_power_gradient_action(const DyadicPath& w, const DyadicPath& h, double p,
                                            const SobolevParams& params, const QuadratureSpec& quad = {}) {
  if (!(p > 1.0)) throw std::invalid_argument("sobolev_power_gradient_action: p must exceed 1");
  const double f = sobolev_energy(w, params, quad);
  if (f <= 0.0) return 0.0;
  const double two_k = params.power();
  return (p / two_k) * std::pow(f, p / two_k - 1.0) * sobolev_directional_derivative(w, h, params, quad);
}

/// (||w1|| + ||w2||)/2 - ||(w1+w2)/2||; nonnegative, zero exactly in the
/// nonnegatively colinear case.
inline double strict_convexity_probe(const DyadicPath& w1, const DyadicPath& w2, const SobolevParams& params,
                                     const QuadratureSpec& quad = {}) {
  const DyadicPath mid = combine(0.5, w1, 0.5, w2);
  return 0.5 * (sobolev_norm(w1, params, quad) + sobolev_norm(w2, params, quad)) - sobolev_norm(mid, params, quad);
}

/// Norm at two quadrature resolutions (panels_per_cell and twice that).
struct QuadratureRefinement {
  double coarse = 0.0;
  double fine = 0.0;
  double finer = 0.0;
  double relative_change = 0.0;
  /// log2 of successive difference ratio; NaN when the differences vanish.
  double observed_order = std::numeric_limits<double>::quiet_NaN();
};

inline QuadratureRefinement sobolev_refinement_check(const DyadicPath& w, const SobolevParams& params,
                                                     const QuadratureSpec& quad = {}) {
  QuadratureRefinement r;
  r.coarse = sobolev_norm(w, params, quad);
  r.fine = sobolev_norm(w, params, quad.refined());
  r.finer = sobolev_norm(w, params, quad.refined().refined());
  r.relative_change = r.fine == 0.0 ? 0.0 : std::abs(r.fine - r.coarse) / r.fine;
  const double d1 = std::abs(r.fine - r.coarse);
  const double d2 = std::abs(r.finer - r.fine);
  if (d1 > 0.0 && d2 > 0.0) r.observed_order = std::log2(d1 / d2);
  return r;
}

/// l^p norm of a finite vector, p in [1, inf].
inline double lp_norm(std::span<const double> v, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (std::isinf(p) || m == 0.0) return m;
  double sum = 0.0;
  for (double x : v) sum += std::pow(std::abs(x) / m, p);
  return m * std::pow(sum, 1.0 / p);
}

}  // namespace wot
