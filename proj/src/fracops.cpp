#include "fracvirial/fracops.hpp"

#include <cmath>

#include "fracvirial/fft.hpp"

namespace fracvirial {

FracParams::FracParams(double s_, double sigma_, int dim_)
    : s(s_), sigma(sigma_), dim(dim_) {
  if (!(s > 0.0 && s < 1.0)) throw invalid_input("FracParams: need s in (0,1)");
  if (!(sigma > 0.0)) throw invalid_input("FracParams: need sigma > 0");
  if (dim < 1) throw invalid_input("FracParams: need N >= 1");
}

void FracParams::validate_radial_regime() const {
  if (dim < 2) throw invalid_input("radial regime needs N >= 2");
  if (!(s > 0.5 && s < 1.0))
    throw invalid_input("radial regime needs s in (1/2,1)");
  double sc = s_c();
  if (sc < -1e-12 || sc > s + 1e-12)
    throw invalid_input("radial regime needs 0 <= s_c <= s, got s_c=" +
                        std::to_string(sc));
  if (!(sigma < 2.0 * s))
    throw invalid_input("radial regime needs sigma < 2s");
}

double resolvent_normalization(double s) {
  return std::sqrt(std::sin(M_PI * s) / M_PI);
}

FieldOnGrid frac_laplacian(const FieldOnGrid& u, double s) {
  if (!(s > 0.0 && s <= 2.0))
    throw invalid_input("frac_laplacian: need 0 < s <= 2");
  require_finite(u, "frac_laplacian");
  FieldOnGrid uhat = forward_fft_copy(u);
  for (std::size_t k = 0; k < uhat.size(); ++k) {
    double x = xi_sq_at(u.grid, k);
    uhat.values[k] *= x > 0.0 ? std::pow(x, s) : 0.0;
  }
  inverse_fft(uhat);
  return uhat;
}

double frac_seminorm(const FieldOnGrid& u, double s) {
  if (s < 0.0) throw invalid_input("frac_seminorm: need s >= 0");
  require_finite(u, "frac_seminorm");
  FieldOnGrid uhat = forward_fft_copy(u);
  double acc = 0.0;
  for (std::size_t k = 0; k < uhat.size(); ++k) {
    double x = xi_sq_at(u.grid, k);
    double mult = s == 0.0 ? 1.0 : (x > 0.0 ? std::pow(x, s) : 0.0);
    acc += mult * std::norm(uhat.values[k]);
  }
  double n = static_cast<double>(u.size());
  return std::sqrt(u.grid.cell_volume() / n * acc);
}

namespace {

// sum_{k>=0} (-1)^k e^{-(a+k)T}/(a+k): tail of int e^{-a t}/(1+e^{-t}) dt
double exp_series_tail(double a, double T) {
  double acc = 0.0, sign = 1.0;
  for (int k = 0; k < 60; ++k) {
    double term = std::exp(-(a + k) * T) / (a + k);
    acc += sign * term;
    sign = -sign;
    if (term < 1e-18 * std::max(std::abs(acc), 1e-30)) break;
  }
  return acc;
}

double balak_scalar_exp(double x, double s, const MQuadrature& q) {
  // recenter m = x e^t:  x^s (sin pi s/pi) int e^{st}/(1+e^t) dt over R;
  // window [-T,T] plus exact exponential-series tails.
  const double T = std::max(14.0, 3.0 / std::min(s, 1.0 - s));
  auto integrand = [&](double t) {
    // e^{st}/(1+e^t), evaluated stably on both sides
    return t < 0 ? std::exp(s * t) / (1.0 + std::exp(t))
                 : std::exp((s - 1.0) * t) / (1.0 + std::exp(-t));
  };
  // upper tail: int_T^inf e^{-(1-s)t}/(1+e^{-t}) dt, lower mirrored with a=s
  const double tails = exp_series_tail(1.0 - s, T) + exp_series_tail(s, T);
  int need = static_cast<int>(std::ceil(2.0 * T / 1.3));
  int panels0 = std::max(q.panels, need);
  double prev = 0.0, cur = 0.0;
  for (int scale = 1; scale <= 4; scale *= 2) {
    cur = composite_gl(integrand, -T, T, panels0 * scale, q.nodes_per_panel);
    if (scale > 1 &&
        std::abs(cur - prev) <= q.rel_tol * std::abs(cur) + q.abs_tol)
      return std::pow(x, s) * std::sin(M_PI * s) / M_PI * (cur + tails);
    prev = cur;
  }
  throw quadrature_error("balakrishnan_scalar: exp scheme did not converge",
                         std::abs(cur - prev));
}

double balak_scalar_tan(double x, double s, const MQuadrature& q) {
  // endpoint corrections for the clipped theta-window [eps, pi/2 - eps]:
  // near 0 the integrand is ~ theta^{s-1}(1 - theta/x), near pi/2 it is
  // ~ x w^{-s} - x^2 w^{1-s} in w = pi/2 - theta.
  const double eps = MQuadrature::kTanEps;
  const double tail_lo =
      std::pow(eps, s) / s - std::pow(eps, s + 1.0) / ((s + 1.0) * x);
  const double tail_hi = x * std::pow(eps, 1.0 - s) / (1.0 - s) -
                         x * x * std::pow(eps, 2.0 - s) / (2.0 - s);
  double prev = 0.0, cur = 0.0;
  for (int scale = 1; scale <= 8; scale *= 2) {
    auto nodes = q.nodes(0.0, 0.0, scale);
    double acc = 0.0;
    for (const auto& nd : nodes)
      acc += nd.weight * std::pow(nd.m, s - 1.0) * x / (x + nd.m);
    cur = acc + tail_lo + tail_hi;
    if (scale > 1 &&
        std::abs(cur - prev) <= q.rel_tol * std::abs(cur) + q.abs_tol)
      return std::sin(M_PI * s) / M_PI * cur;
    prev = cur;
  }
  throw quadrature_error("balakrishnan_scalar: tangent scheme did not converge",
                         std::abs(cur - prev));
}

}  // namespace

double balakrishnan_scalar(double x, double s, const MQuadrature& q) {
  if (!(x > 0.0)) throw invalid_input("balakrishnan_scalar: need x > 0");
  if (!(s > 0.0 && s < 1.0))
    throw invalid_input("balakrishnan_scalar: need s in (0,1)");
  return q.scheme == MScheme::ExpSubstitution ? balak_scalar_exp(x, s, q)
                                              : balak_scalar_tan(x, s, q);
}

double plancherel_weight(double x, double s, const MQuadrature& q) {
  if (!(x > 0.0)) throw invalid_input("plancherel_weight: need x > 0");
  // m = x e^t again: int m^s/(x+m)^2 dm = x^{s-1} int e^{(1+s)t}/(1+e^t)^2 dt
  const double T = std::max(14.0, 3.0 / std::min(s, 1.0 - s));
  auto integrand = [&](double t) {
    if (t < 0) {
      double e = std::exp(t);
      return std::exp((1.0 + s) * t) / ((1.0 + e) * (1.0 + e));
    }
    double e = std::exp(-t);
    return std::exp((s - 1.0) * t) / ((1.0 + e) * (1.0 + e));
  };
  // tails: upper ~ e^{-(1-s)t}(1+e^{-t})^{-2}, lower ~ e^{(1+s)t}(1+e^t)^{-2};
  // expand (1+q)^{-2} = sum (k+1)(-q)^k
  auto tail2 = [&](double a) {
    double acc = 0.0, sign = 1.0;
    for (int k = 0; k < 60; ++k) {
      double term = (k + 1) * std::exp(-(a + k) * T) / (a + k);
      acc += sign * term;
      sign = -sign;
      if (term < 1e-18) break;
    }
    return acc;
  };
  double tails = tail2(1.0 - s) + tail2(1.0 + s);
  int panels0 =
      std::max(q.panels, static_cast<int>(std::ceil(2.0 * T / 1.3)));
  double prev = 0.0, cur = 0.0;
  for (int scale = 1; scale <= 4; scale *= 2) {
    cur = composite_gl(integrand, -T, T, panels0 * scale, q.nodes_per_panel);
    if (scale > 1 &&
        std::abs(cur - prev) <= q.rel_tol * std::abs(cur) + q.abs_tol)
      return std::sin(M_PI * s) / M_PI * std::pow(x, s - 1.0) * (cur + tails);
    prev = cur;
  }
  throw quadrature_error("plancherel_weight did not converge",
                         std::abs(cur - prev));
}

MWindow apply_window(const Grid& g, double s, double rel_tol) {
  double xi_min = M_PI / g.half_length;
  double x_min = xi_min * xi_min;
  double x_max = g.dim * g.max_wavenumber() * g.max_wavenumber();
  double t0 = std::log(x_min) - 12.0;
  double t1 = std::log(x_max) - std::log(rel_tol) / (3.0 - s) + 1.0;
  return {t0, t1};
}

FieldOnGrid balakrishnan_apply(const FieldOnGrid& u, double s,
                               const MQuadrature& q) {
  if (!(s > 0.0 && s < 1.0))
    throw invalid_input("balakrishnan_apply: need s in (0,1)");
  require_finite(u, "balakrishnan_apply");
  const Grid& g = u.grid;
  FieldOnGrid uhat = forward_fft_copy(u);

  auto mult_at_scale = [&](int scale, std::vector<double>& mult) {
    MWindow w = apply_window(g, s, q.rel_tol);
    std::vector<MQuadrature::Node> nodes;
    if (q.scheme == MScheme::ExpSubstitution)
      nodes = q.nodes(w.t0, w.t1, scale);
    else
      nodes = q.nodes(0.0, 0.0, scale);
    const double m_lo = std::exp(w.t0), m_hi = std::exp(w.t1);
    const double c = std::sin(M_PI * s) / M_PI;
    mult.assign(uhat.size(), 0.0);
    for (std::size_t k = 0; k < uhat.size(); ++k) {
      double x = xi_sq_at(g, k);
      if (x <= 0.0) continue;  // zero mode annihilated
      double acc = 0.0;
      for (const auto& nd : nodes)
        acc += nd.weight * std::pow(nd.m, s - 1.0) * x / (x + nd.m);
      if (q.scheme == MScheme::ExpSubstitution) {
        // analytic tails: lower 2-term expansion of x/(x+m) about m=0,
        // upper 2-term Laurent expansion about m=inf
        acc += std::pow(m_lo, s) / s - std::pow(m_lo, s + 1.0) / ((s + 1.0) * x);
        acc += x * std::pow(m_hi, s - 1.0) / (1.0 - s) -
               x * x * std::pow(m_hi, s - 2.0) / (2.0 - s);
      } else {
        const double eps = MQuadrature::kTanEps;
        acc += std::pow(eps, s) / s - std::pow(eps, s + 1.0) / ((s + 1.0) * x);
        acc += x * std::pow(eps, 1.0 - s) / (1.0 - s) -
               x * x * std::pow(eps, 2.0 - s) / (2.0 - s);
      }
      mult[k] = c * acc;
    }
  };

  std::vector<double> m1, m2;
  mult_at_scale(1, m1);
  mult_at_scale(2, m2);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < uhat.size(); ++k) {
    double d = (m1[k] - m2[k]);
    num += d * d * std::norm(uhat.values[k]);
    den += m2[k] * m2[k] * std::norm(uhat.values[k]);
  }
  double resid = den > 0.0 ? std::sqrt(num / den) : 0.0;
  if (resid > 10.0 * q.rel_tol)
    throw quadrature_error("balakrishnan_apply: m-quadrature not converged",
                           resid);
  for (std::size_t k = 0; k < uhat.size(); ++k) uhat.values[k] *= m2[k];
  inverse_fft(uhat);
  return uhat;
}

FieldOnGrid resolvent_field(const FieldOnGrid& u, double m, double s) {
  if (!(m > 0.0)) throw invalid_input("resolvent_field: need m > 0");
  require_finite(u, "resolvent_field");
  const double c = resolvent_normalization(s);
  FieldOnGrid uhat = forward_fft_copy(u);
  for (std::size_t k = 0; k < uhat.size(); ++k)
    uhat.values[k] *= c / (xi_sq_at(u.grid, k) + m);
  inverse_fft(uhat);
  return uhat;
}

double weighted_gradient_integral(const FieldOnGrid& u, double s,
                                  const MQuadrature& q) {
  if (!(s > 0.0 && s < 1.0))
    throw invalid_input("weighted_gradient_integral: need s in (0,1)");
  require_finite(u, "weighted_gradient_integral");
  const Grid& g = u.grid;
  FieldOnGrid uhat = forward_fft_copy(u);
  const double csq = std::sin(M_PI * s) / M_PI;
  MWindow w = apply_window(g, s, q.rel_tol);
  const double m_lo = std::exp(w.t0), m_hi = std::exp(w.t1);

  auto value_at_scale = [&](int scale) {
    std::vector<MQuadrature::Node> nodes;
    if (q.scheme == MScheme::ExpSubstitution)
      nodes = q.nodes(w.t0, w.t1, scale);
    else
      nodes = q.nodes(0.0, 0.0, scale);
    double total = 0.0;
    for (std::size_t k = 0; k < uhat.size(); ++k) {
      double x = xi_sq_at(g, k);
      if (x <= 0.0) continue;  // gradient kills the zero mode
      double acc = 0.0;
      for (const auto& nd : nodes) {
        double d = x + nd.m;
        acc += nd.weight * std::pow(nd.m, s) / (d * d);
      }
      if (q.scheme == MScheme::ExpSubstitution) {
        acc += std::pow(m_lo, s + 1.0) / ((s + 1.0) * x * x) -
               2.0 * std::pow(m_lo, s + 2.0) / ((s + 2.0) * x * x * x);
        acc += std::pow(m_hi, s - 1.0) / (1.0 - s) -
               2.0 * x * std::pow(m_hi, s - 2.0) / (2.0 - s);
      } else {
        const double eps = MQuadrature::kTanEps;
        acc += std::pow(eps, s + 1.0) / ((s + 1.0) * x * x) -
               2.0 * std::pow(eps, s + 2.0) / ((s + 2.0) * x * x * x);
        acc += std::pow(eps, 1.0 - s) / (1.0 - s) -
               2.0 * x * std::pow(eps, 2.0 - s) / (2.0 - s);
      }
      total += x * acc * std::norm(uhat.values[k]);
    }
    double n = static_cast<double>(u.size());
    return csq * g.cell_volume() / n * total;
  };

  double v1 = value_at_scale(1), v2 = value_at_scale(2);
  double resid = std::abs(v1 - v2);
  if (resid > q.rel_tol * std::abs(v2) + q.abs_tol)
    throw quadrature_error("weighted_gradient_integral: not converged", resid);
  return v2;
}

double energy(const FieldOnGrid& u, const FracParams& p) {
  double grad = frac_seminorm(u, p.s);
  return 0.5 * grad * grad -
         lp_integral(u, 2.0 * p.sigma + 2.0) / (2.0 * p.sigma + 2.0);
}

double mass(const FieldOnGrid& u) { return l2_norm_sq(u); }

}  // namespace fracvirial
