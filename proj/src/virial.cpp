#include "fracvirial/virial.hpp"

#include <cmath>

#include "fracvirial/fft.hpp"

namespace fracvirial {

namespace {

// Hessian quadratic form sum_kl conj(g_k) H_kl g_l at one grid point (real).
inline double hess_contract_2d(const double* h3, const cplx& gx,
                               const cplx& gy) {
  return h3[0] * std::norm(gx) + h3[2] * std::norm(gy) +
         2.0 * h3[1] * (gx.real() * gy.real() + gx.imag() * gy.imag());
}

struct MLoopWeights {
  bool hess_general = false;
  bool hess_radial = false;
  bool wgi = false;
  bool defect = false;
  bool psi2pow = false;
  bool combo = false;
  bool biharm = false;
  bool biharm_sampled = false;  // cheap sampled-weight route for monitors
  double pw = 1.0;     // exponent N/(2s) for psi2
  double c_eta = 0.0;  // margin coefficient for the combo weight
};

struct MLoopResult {
  double hess_general = 0, hess_radial = 0, wgi = 0, defect = 0;
  double psi2pow = 0, combo = 0, biharm = 0;
  double residual = 0;  // relative doubling residual
};

// One pass of the m-quadrature. Per node: u_m and grad u_m spectrally, then
// weighted grid sums; the truncated upper tail is restored from the two-term
// resolvent expansion u_m = c_s (u/m - (-Delta)u/m^2 + ...).
//
// The biharmonic pairing int Lap^2 phi_R |u_m|^2 is evaluated after an exact
// integration by parts on the torus as int Lap phi_R Lap(|u_m|^2): Lap^2
// phi_R jumps across the junction circles and its grid sampling does not
// converge cleanly, while Lap phi_R is C^1. |u_m|^2 is formed on a 2x grid
// where it is an alias-free trigonometric polynomial, and its Laplacian is
// spectral, so the pairing is exact up to the weight's own spectral tail.
// The constant mode of u_m drops out under Lap, which also removes the 1/m^2
// amplification that the raw density would suffer as m -> 0.
MLoopResult m_loop(const FieldOnGrid& u, const CutoffFields& cf, double s,
                   const MQuadrature& q, const MLoopWeights& want,
                   bool verify) {
  const Grid& g = u.grid;
  const int dim = g.dim;
  const double hvol = g.cell_volume();
  const double cs2 = std::sin(M_PI * s) / M_PI;

  FieldOnGrid uhat = forward_fft_copy(u);
  const cplx u_mean = mean_value(u);

  // fine-grid pairing weights: (-|k|^2) conj(hat(Lap phi_R)) h^d / N
  std::vector<cplx> biharm_weight;
  if (want.biharm && !want.biharm_sampled) {
    const Grid& fg = cf.fine_grid;
    biharm_weight.resize(fg.size());
    double norm = fg.cell_volume() / static_cast<double>(fg.size());
    for (std::size_t k = 0; k < fg.size(); ++k)
      biharm_weight[k] =
          -xi_sq_at(fg, k) * norm * std::conj(cf.lap_fine_hat[k]);
  }
  // int Lap phi Lap(W) for W a product of two padded fields
  auto biharm_pair = [&](const FieldOnGrid& a2, const FieldOnGrid& b2) {
    FieldOnGrid w2(cf.fine_grid);
    for (std::size_t i = 0; i < w2.size(); ++i)
      w2.values[i] = (std::conj(a2.values[i]) * b2.values[i]).real();
    forward_fft(w2);
    double acc = 0.0;
    for (std::size_t k = 0; k < w2.size(); ++k)
      acc += (biharm_weight[k] * w2.values[k]).real();
    return acc;
  };

  std::vector<double> psi2pw, margin_w;
  if (want.psi2pow || want.combo) {
    psi2pw.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      psi2pw[i] = cf.psi2[i] > 0.0 ? std::pow(cf.psi2[i], want.pw) : 0.0;
    if (want.combo) {
      margin_w.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i)
        margin_w[i] = cf.psi1[i] - want.c_eta * psi2pw[i];
    }
  }

  struct Sums {
    double hess_general = 0, hess_radial = 0, wgi = 0, defect = 0;
    double psi2pow = 0, combo = 0, biharm = 0;
  };

  const bool need_grad = want.hess_general || want.hess_radial || want.wgi ||
                         want.defect || want.psi2pow || want.combo;
  MWindow w = apply_window(g, s, q.rel_tol);
  const double m_hi = std::exp(w.t1);

  auto evaluate = [&](int scale) {
    auto nodes = q.scheme == MScheme::ExpSubstitution
                     ? q.nodes(w.t0, w.t1, scale)
                     : q.nodes(0.0, 0.0, scale);
    Sums total;
    FieldOnGrid um(g);
    for (const auto& nd : nodes) {
      for (std::size_t k = 0; k < g.size(); ++k)
        um.values[k] = uhat.values[k] / (xi_sq_at(g, k) + nd.m);
      std::vector<FieldOnGrid> grad;
      if (need_grad) grad = gradient_from_spectrum(um);
      Sums node;
      if (want.biharm && !want.biharm_sampled) {
        FieldOnGrid um2 = pad_spectrum(um, 2);
        inverse_fft(um2);
        node.biharm = biharm_pair(um2, um2);
      } else if (want.biharm) {
        // sampled Lap^2 phi_R route; the |mean u_m|^2 part integrates to
        // zero exactly and would be 1/m^2-amplified otherwise
        FieldOnGrid um_phys = um;
        inverse_fft(um_phys);
        cplx um_mean = u_mean / nd.m;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
          acc += cf.bilap[i] *
                 (std::norm(um_phys.values[i]) - std::norm(um_mean));
        node.biharm = hvol * acc;
      }
      for (std::size_t i = 0; i < g.size() && need_grad; ++i) {
        double gn = std::norm(grad[0].values[i]);
        if (dim == 2) gn += std::norm(grad[1].values[i]);
        if (want.wgi) node.wgi += gn;
        if (want.defect) node.defect += cf.psi1[i] * gn;
        if (want.psi2pow) node.psi2pow += psi2pw[i] * gn;
        if (want.combo) node.combo += margin_w[i] * gn;
        if (want.hess_radial) node.hess_radial += cf.phi_rr[i] * gn;
        if (want.hess_general) {
          if (dim == 1)
            node.hess_general += cf.hess[i] * std::norm(grad[0].values[i]);
          else
            node.hess_general += hess_contract_2d(
                &cf.hess[3 * i], grad[0].values[i], grad[1].values[i]);
        }
      }
      double wt = nd.weight * std::pow(nd.m, s);
      total.hess_general += wt * node.hess_general;
      total.hess_radial += wt * node.hess_radial;
      total.wgi += wt * node.wgi;
      total.defect += wt * node.defect;
      total.psi2pow += wt * node.psi2pow;
      total.combo += wt * node.combo;
      total.biharm += wt * node.biharm;
    }
    total.hess_general *= 4.0 * hvol;
    total.hess_radial *= 4.0 * hvol;
    total.wgi *= hvol;
    total.defect *= 4.0 * hvol;
    total.psi2pow *= hvol;
    total.combo *= 4.0 * hvol;

    if (q.scheme == MScheme::ExpSubstitution) {
      const double tail1 = std::pow(m_hi, s - 1.0) / (1.0 - s);
      const double tail2 = std::pow(m_hi, s - 2.0) / (2.0 - s);
      FieldOnGrid lap_hat = uhat;
      for (std::size_t k = 0; k < g.size(); ++k)
        lap_hat.values[k] *= xi_sq_at(g, k);
      if (need_grad) {
        auto gu = gradient_from_spectrum(uhat);
        auto glu = gradient_from_spectrum(lap_hat);
        double t_wgi = 0, t_def = 0, t_pow = 0, t_cmb = 0, t_rad = 0,
               t_gen = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double a = std::norm(gu[0].values[i]);
          double c = (std::conj(gu[0].values[i]) * glu[0].values[i]).real();
          if (dim == 2) {
            a += std::norm(gu[1].values[i]);
            c += (std::conj(gu[1].values[i]) * glu[1].values[i]).real();
          }
          double v = a * tail1 - 2.0 * c * tail2;
          t_wgi += v;
          if (want.defect) t_def += cf.psi1[i] * v;
          if (want.psi2pow) t_pow += psi2pw[i] * v;
          if (want.combo) t_cmb += margin_w[i] * v;
          if (want.hess_radial) t_rad += cf.phi_rr[i] * v;
          if (want.hess_general) {
            if (dim == 1) {
              t_gen += cf.hess[i] *
                       (std::norm(gu[0].values[i]) * tail1 -
                        2.0 * tail2 *
                            (std::conj(gu[0].values[i]) * glu[0].values[i])
                                .real());
            } else {
              const double* h3 = &cf.hess[3 * i];
              double auu = hess_contract_2d(h3, gu[0].values[i],
                                            gu[1].values[i]);
              double aul =
                  h3[0] * (std::conj(gu[0].values[i]) * glu[0].values[i])
                              .real() +
                  h3[2] * (std::conj(gu[1].values[i]) * glu[1].values[i])
                              .real() +
                  h3[1] * ((std::conj(gu[0].values[i]) * glu[1].values[i])
                               .real() +
                           (std::conj(gu[1].values[i]) * glu[0].values[i])
                               .real());
              t_gen += auu * tail1 - 2.0 * aul * tail2;
            }
          }
        }
        if (want.wgi) total.wgi += hvol * t_wgi;
        if (want.defect) total.defect += 4.0 * hvol * t_def;
        if (want.psi2pow) total.psi2pow += hvol * t_pow;
        if (want.combo) total.combo += 4.0 * hvol * t_cmb;
        if (want.hess_radial) total.hess_radial += 4.0 * hvol * t_rad;
        if (want.hess_general) total.hess_general += 4.0 * hvol * t_gen;
      }
      if (want.biharm && !want.biharm_sampled) {
        FieldOnGrid u2 = pad_spectrum(uhat, 2);
        inverse_fft(u2);
        FieldOnGrid lu2 = pad_spectrum(lap_hat, 2);
        inverse_fft(lu2);
        double a = biharm_pair(u2, u2);
        double b = biharm_pair(u2, lu2);
        total.biharm += a * tail1 - 2.0 * b * tail2;
      } else if (want.biharm) {
        FieldOnGrid lap_u = inverse_fft_copy(lap_hat);
        double a = 0, b = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          a += cf.bilap[i] * (std::norm(u.values[i]) - std::norm(u_mean));
          b += cf.bilap[i] * (std::conj(u.values[i]) * lap_u.values[i]).real();
        }
        total.biharm += hvol * (a * tail1 - 2.0 * b * tail2);
      }
    }
    return total;
  };

  Sums v1{}, v2;
  if (verify) v1 = evaluate(1);
  v2 = evaluate(verify ? 2 : 1);
  MLoopResult res;
  res.hess_general = cs2 * v2.hess_general;
  res.hess_radial = cs2 * v2.hess_radial;
  res.wgi = cs2 * v2.wgi;
  res.defect = cs2 * v2.defect;
  res.psi2pow = cs2 * v2.psi2pow;
  res.combo = cs2 * v2.combo;
  res.biharm = cs2 * v2.biharm;
  if (verify) {
    double scale_ref = std::abs(v2.wgi);
    if (scale_ref == 0.0)
      scale_ref = std::max({std::abs(v2.hess_general), std::abs(v2.biharm),
                            std::abs(v2.defect), 1e-300});
    double r = 0.0;
    r = std::max(r, std::abs(v1.hess_general - v2.hess_general));
    r = std::max(r, std::abs(v1.hess_radial - v2.hess_radial));
    r = std::max(r, std::abs(v1.wgi - v2.wgi));
    r = std::max(r, std::abs(v1.defect - v2.defect));
    r = std::max(r, std::abs(v1.psi2pow - v2.psi2pow));
    r = std::max(r, std::abs(v1.combo - v2.combo));
    r = std::max(r, std::abs(v1.biharm - v2.biharm));
    res.residual = r / scale_ref;
    if (res.residual > 100.0 * q.rel_tol)
      throw quadrature_error("virial m-integrals not converged", res.residual);
  }
  return res;
}

}  // namespace

double localized_virial(const FieldOnGrid& u, const CutoffFields& cf) {
  require_finite(u, "localized_virial");
  const Grid& g = u.grid;
  FieldOnGrid uhat = forward_fft_copy(u);
  auto grad = gradient_from_spectrum(uhat);
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    cplx dot = cf.grad[0][i] * grad[0].values[i];
    if (g.dim == 2) dot += cf.grad[1][i] * grad[1].values[i];
    acc += (std::conj(u.values[i]) * dot).imag();
  }
  return 2.0 * g.cell_volume() * acc;
}

double localized_virial(const FieldOnGrid& u, const RescaledCutoff& c) {
  return localized_virial(u, eval_on_grid(c, u.grid));
}

VirialReport virial_rhs_general(const FieldOnGrid& u, const CutoffFields& cf,
                                const FracParams& p, const MQuadrature& q,
                                HessianPath path) {
  require_finite(u, "virial_rhs_general");
  MLoopWeights want;
  want.hess_general = path == HessianPath::General;
  want.hess_radial = path == HessianPath::Radial;
  want.biharm = true;
  MLoopResult r = m_loop(u, cf, p.s, q, want, true);

  VirialReport rep;
  rep.m_phi = localized_virial(u, cf);
  rep.hessian_term =
      path == HessianPath::General ? r.hess_general : r.hess_radial;
  rep.biharmonic_term = -r.biharm;
  double pwr = 2.0 * p.sigma + 2.0;
  double nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    nl += cf.lap[i] * std::pow(std::abs(u.values[i]), pwr);
  rep.nonlinear_term =
      -2.0 * p.sigma / (p.sigma + 1.0) * u.grid.cell_volume() * nl;
  rep.rhs_total = rep.hessian_term + rep.biharmonic_term + rep.nonlinear_term;
  double grad = frac_seminorm(u, p.s);
  rep.grad_norm_sq = grad * grad;
  rep.energy = energy(u, p);
  rep.full_rhs = full_virial_rhs(u, p, rep.energy);
  rep.quadrature_residual = r.residual;
  return rep;
}

double full_virial_rhs(const FieldOnGrid& u, const FracParams& p,
                       double energy_value) {
  double grad = frac_seminorm(u, p.s);
  return 4.0 * p.sigma * p.dim * energy_value -
         2.0 * (p.sigma * p.dim - 2.0 * p.s) * grad * grad;
}

double tail_nonlinear_term(const FieldOnGrid& u, const CutoffFields& cf,
                           const FracParams& p) {
  double pwr = 2.0 * p.sigma + 2.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    acc += (cf.lap[i] - p.dim) * std::pow(std::abs(u.values[i]), pwr);
  return -2.0 * p.sigma / (p.sigma + 1.0) * u.grid.cell_volume() * acc;
}

EstimateDecomposition radial_estimate_decomposition(const FieldOnGrid& u,
                                                    const CutoffFields& cf,
                                                    const FracParams& p,
                                                    const MQuadrature& q,
                                                    double eps) {
  double eps_max = (2.0 * p.s - 1.0) * p.sigma / p.s;
  if (!(eps > 0.0 && eps < eps_max))
    throw invalid_input("radial_estimate_decomposition: need 0 < eps < " +
                        std::to_string(eps_max));
  MLoopWeights want;
  want.defect = true;
  want.wgi = true;
  want.biharm = true;
  MLoopResult r = m_loop(u, cf, p.s, q, want, true);

  EstimateDecomposition d;
  d.eps = eps;
  double grad = frac_seminorm(u, p.s);
  double e = energy(u, p);
  d.core_identity = 4.0 * p.sigma * p.dim * e -
                    2.0 * (p.sigma * p.dim - 2.0 * p.s) * grad * grad;
  d.localization_defect = r.defect;
  d.psi1_integral = r.defect / 4.0;
  d.biharmonic_term = -r.biharm;
  d.tail_nonlinear = tail_nonlinear_term(u, cf, p);
  double pwr = 2.0 * p.sigma + 2.0;
  double nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    nl += cf.lap[i] * std::pow(std::abs(u.values[i]), pwr);
  nl *= -2.0 * p.sigma / (p.sigma + 1.0) * u.grid.cell_volume();
  d.rhs_total = 4.0 * r.wgi - r.defect + d.biharmonic_term + nl;
  d.identity_residual =
      d.rhs_total - (d.core_identity - d.localization_defect +
                     d.biharmonic_term + d.tail_nonlinear);
  d.strauss_tail_scale = std::pow(cf.R, -p.sigma * (p.dim - 1) + eps * p.s) *
                         std::pow(grad, p.sigma / p.s + eps);
  return d;
}

EstimateDecomposition refined_decomposition(const FieldOnGrid& u,
                                            const CutoffFields& cf,
                                            const FracParams& p,
                                            const MQuadrature& q, double eta) {
  if (!p.l2_critical())
    throw invalid_input("refined_decomposition: needs sigma = 2s/N");
  const double s = p.s;
  const int N = p.dim;
  MLoopWeights want;
  want.defect = true;
  want.wgi = true;
  want.biharm = true;
  want.psi2pow = true;
  want.combo = true;
  want.pw = N / (2.0 * s);
  want.c_eta = eta / (N + 2.0 * s);
  MLoopResult r = m_loop(u, cf, s, q, want, true);

  EstimateDecomposition d;
  d.eta = eta;
  d.c_eta = want.c_eta;
  d.psi1_integral = r.defect / 4.0;
  d.psi2_pow_integral = r.psi2pow;
  d.localization_defect = r.defect;
  d.certified_combo = r.combo;
  d.biharmonic_term = -r.biharm;
  double e = energy(u, p);
  double pwr = 2.0 * p.sigma + 2.0;
  double nl = 0.0, psi2nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double dens = std::pow(std::abs(u.values[i]), pwr);
    nl += cf.lap[i] * dens;
    psi2nl += cf.psi2[i] * dens;
  }
  double hvol = u.grid.cell_volume();
  nl *= -2.0 * p.sigma / (p.sigma + 1.0) * hvol;
  d.psi2_nl_integral = psi2nl * hvol;
  d.rhs_total = 4.0 * r.wgi - r.defect + d.biharmonic_term + nl;
  d.core_identity = 8.0 * s * e;
  d.tail_nonlinear = tail_nonlinear_term(u, cf, p);
  // exact relation at sigma = 2s/N:
  //   rhs = 8sE - 4 Psi1 + (4s/(N+2s)) Psi2nl + biharm + residual
  d.identity_residual =
      d.rhs_total - (8.0 * s * e - 4.0 * d.psi1_integral +
                     4.0 * s / (N + 2.0 * s) * d.psi2_nl_integral +
                     d.biharmonic_term);
  d.substitution_error = 4.0 * s / (N + 2.0 * s) * d.psi2_nl_integral -
                         4.0 * d.c_eta * d.psi2_pow_integral;
  d.bound_slack = d.rhs_total - 8.0 * s * e;
  return d;
}

bool is_approximately_radial(const FieldOnGrid& u, double tol) {
  const Grid& g = u.grid;
  const int M = g.points_per_dim;
  double scale = sup_norm(u);
  if (scale == 0.0) return true;
  double dev = 0.0;
  if (g.dim == 1) {
    for (int i = 1; i < M; ++i)
      dev = std::max(dev, std::abs(u.values[i] - u.values[(M - i) % M]));
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        std::size_t idx = static_cast<std::size_t>(i) * M + j;
        std::size_t tr = static_cast<std::size_t>(j) * M + i;
        std::size_t fl = static_cast<std::size_t>((M - i) % M) * M + j;
        dev = std::max(dev, std::abs(u.values[idx] - u.values[tr]));
        dev = std::max(dev, std::abs(u.values[idx] - u.values[fl]));
      }
  }
  return dev <= tol * scale;
}

double strauss_ratio(const FieldOnGrid& u, double alpha) {
  const Grid& g = u.grid;
  if (!(alpha > 0.5 && alpha < 0.5 * g.dim))
    throw invalid_input("strauss_ratio: need 1/2 < alpha < N/2");
  require_finite(u, "strauss_ratio");
  if (!is_approximately_radial(u))
    throw invalid_input("strauss_ratio: field is not radial");
  double denom = frac_seminorm(u, alpha);
  if (denom == 0.0) return 0.0;
  const int M = g.points_per_dim;
  const double expo = 0.5 * g.dim - alpha;
  double best = 0.0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double r = std::hypot(g.coord(i), g.coord(j));
      if (r < 1e-14) continue;
      best = std::max(
          best, std::pow(r, expo) *
                    std::abs(u.values[static_cast<std::size_t>(i) * M + j]));
    }
  return best / denom;
}

BoundReport virial_bound_a1(const FieldOnGrid& u, const CutoffFields& cf) {
  BoundReport rep;
  rep.lhs = std::abs(localized_virial(u, cf));
  double half = frac_seminorm(u, 0.5);
  rep.rhs = half * half + l2_norm(u) * half;
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

double biharmonic_integral(const FieldOnGrid& u, const CutoffFields& cf,
                           double s, const MQuadrature& q, bool exact) {
  MLoopWeights want;
  want.biharm = true;
  want.biharm_sampled = !exact;
  return m_loop(u, cf, s, q, want, false).biharm;
}

BoundReport biharmonic_bound_a2(const FieldOnGrid& u, const RescaledCutoff& c,
                                const Grid& grid, double s,
                                const MQuadrature& q) {
  CutoffFields cf = eval_on_grid(c, grid);
  BoundReport rep;
  rep.lhs = std::abs(biharmonic_integral(u, cf, s, q));
  double sup_bilap = 0.0, sup_lap = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    double rho = 12.0 * i / 20000.0;
    sup_bilap = std::max(
        sup_bilap, std::abs(c.base->bilaplacian(rho, grid.dim)) / (c.R * c.R));
    double lap = c.base->eval(rho).gp +
                 (grid.dim - 1) * (rho > 1e-12 ? c.base->g(rho) / rho : 1.0);
    sup_lap = std::max(sup_lap, std::abs(lap));
  }
  rep.rhs = std::pow(sup_bilap, s) * std::pow(sup_lap, 1.0 - s) * mass(u);
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : 0.0;
  return rep;
}

}  // namespace fracvirial
