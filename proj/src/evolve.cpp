#include "fracvirial/evolve.hpp"

#include <cmath>
#include <sstream>

#include "fracvirial/fft.hpp"
#include "fracvirial/io.hpp"

namespace fracvirial {

namespace {

void apply_dealias_mask(FieldOnGrid& uhat, double fraction) {
  const Grid& g = uhat.grid;
  const int M = g.points_per_dim;
  const int keep = static_cast<int>(std::floor(fraction * (M / 2)));
  auto masked = [&](int idx) { return std::abs(g.mode(idx)) > keep; };
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i)
      if (masked(i)) uhat.values[i] = 0.0;
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        if (masked(i) || masked(j))
          uhat.values[static_cast<std::size_t>(i) * M + j] = 0.0;
  }
}

void nonlinear_half_step(FieldOnGrid& u, double dt, const FracParams& p,
                         double coupling) {
  if (coupling == 0.0) return;
  const double half = 0.5 * dt * coupling;
  for (cplx& z : u.values) {
    double a2s = std::pow(std::abs(z), 2.0 * p.sigma);
    z *= std::polar(1.0, half * a2s);
  }
}

}  // namespace

FieldOnGrid dealias(const FieldOnGrid& u, double fraction) {
  FieldOnGrid uhat = forward_fft_copy(u);
  apply_dealias_mask(uhat, fraction);
  inverse_fft(uhat);
  return uhat;
}

double outer_band_fraction(const FieldOnGrid& u, double dealias_fraction,
                           double s) {
  const Grid& g = u.grid;
  const int M = g.points_per_dim;
  const int keep = static_cast<int>(std::floor(dealias_fraction * (M / 2)));
  const int inner = 2 * keep / 3;
  FieldOnGrid uhat = forward_fft_copy(u);
  double outer = 0.0, total = 0.0;
  auto band = [&](int idx) { return std::abs(g.mode(idx)); };
  for (std::size_t k = 0; k < uhat.size(); ++k) {
    double x = xi_sq_at(g, k);
    if (x <= 0.0) continue;
    double w = std::pow(x, s) * std::norm(uhat.values[k]);
    total += w;
    int bi, bj;
    if (g.dim == 1) {
      bi = band(static_cast<int>(k));
      bj = 0;
    } else {
      bi = band(static_cast<int>(k) / M);
      bj = band(static_cast<int>(k) % M);
    }
    if (std::max(bi, bj) > inner) outer += w;
  }
  return total > 0.0 ? outer / total : 0.0;
}

FieldOnGrid step_strang(const FieldOnGrid& u, double dt, const FracParams& p,
                        double dealias_fraction, double coupling) {
  FieldOnGrid v = u;
  nonlinear_half_step(v, dt, p, coupling);
  forward_fft(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    double x = xi_sq_at(v.grid, k);
    double omega = x > 0.0 ? std::pow(x, p.s) : 0.0;
    v.values[k] *= std::polar(1.0, -dt * omega);
  }
  apply_dealias_mask(v, dealias_fraction);
  inverse_fft(v);
  nonlinear_half_step(v, dt, p, coupling);
  return v;
}

RunLog run(const FieldOnGrid& u0, const EvolveConfig& cfg,
           const FracParams& p) {
  require_finite(u0, "run");
  RunLog log;
  log.r_list = cfg.r_list;

  static const CutoffProfile profile;
  std::vector<CutoffFields> cfs;
  for (double R : cfg.r_list)
    cfs.push_back(eval_on_grid(RescaledCutoff(profile, R), u0.grid));

  FieldOnGrid u = dealias(u0, cfg.dealias_fraction);
  log.initial_energy = energy(u, p);
  log.initial_mass = mass(u);
  log.initial_grad = frac_seminorm(u, p.s);

  double t = 0.0, dt = cfg.dt;
  long long count = 0;

  auto snapshot = [&](double now, double used_dt) {
    Snapshot s;
    s.time = now;
    s.dt = used_dt;
    s.energy = energy(u, p);
    s.mass = mass(u);
    s.grad_norm = frac_seminorm(u, p.s);
    s.boundary_mass = boundary_mass_fraction(u);
    s.band_fraction = outer_band_fraction(u, cfg.dealias_fraction, p.s);
    s.max_amp = sup_norm(u);
    for (std::size_t r = 0; r < cfs.size(); ++r) {
      s.m_r.push_back(localized_virial(u, cfs[r]));
      bool want_rhs = cfg.rhs_every > 0 &&
                      (log.snaps.size() % cfg.rhs_every == 0);
      if (want_rhs) {
        VirialReport rep = virial_rhs_general(u, cfs[r], p, cfg.quad);
        s.rhs.push_back(rep.rhs_total);
      } else {
        s.rhs.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      if (cfg.monitor_error_terms) {
        double bh =
            biharmonic_integral(u, cfs[r], p.s, cfg.monitor_quad, false);
        double tl = tail_nonlinear_term(u, cfs[r], p);
        s.err_terms.push_back(std::abs(bh) + std::abs(tl));
      }
    }
    log.snaps.push_back(std::move(s));
  };

  snapshot(0.0, dt);
  bool done = false;
  while (!done && t < cfg.t_max - 1e-14) {
    // halve dt while the nonlinear phase per step is too large
    if (cfg.coupling != 0.0) {
      double amp = sup_norm(u);
      while (dt * cfg.coupling * std::pow(amp, 2.0 * p.sigma) >
             cfg.max_phase_per_step)
        dt *= 0.5;
    }
    double step_dt = std::min(dt, cfg.t_max - t);
    u = step_strang(u, step_dt, p, cfg.dealias_fraction, cfg.coupling);
    t += step_dt;
    ++count;
    bool bad = false;
    for (const cplx& z : u.values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        bad = true;
        break;
      }
    if (bad) {
      log.instability_flag = true;
      log.abort_reason = "non-finite values after step (blowup or instability)";
      break;
    }
    if (count % cfg.snapshot_stride == 0 || t >= cfg.t_max - 1e-14) {
      snapshot(t, step_dt);
      const Snapshot& s = log.snaps.back();
      if (s.grad_norm > cfg.blowup_grad_factor * log.initial_grad ||
          s.band_fraction > cfg.band_fraction_flag) {
        log.blowup_flag = true;
        log.blowup_time = t;
        done = true;
      } else if (s.boundary_mass > cfg.leak_abort) {
        log.abort_reason = "box leakage: boundary mass fraction " +
                           std::to_string(s.boundary_mass);
        log.instability_flag = true;
        done = true;
      } else {
        double scale = std::max(std::abs(log.initial_energy), 1e-12);
        double drift =
            std::abs(s.energy - log.initial_energy) / (scale * std::max(t, 1.0));
        if (drift > 100.0 * cfg.conservation_tol) {
          log.abort_reason =
              "conservation drift beyond 100x tolerance (instability)";
          log.instability_flag = true;
          done = true;
        }
      }
    }
  }
  log.steps = count;

  double e_drift = 0.0, m_drift = 0.0;
  for (const Snapshot& s : log.snaps) {
    if (s.time <= 0.0) continue;
    double tt = std::max(s.time, 1e-12);
    e_drift = std::max(e_drift,
                       std::abs(s.energy - log.initial_energy) /
                           (std::max(std::abs(log.initial_energy), 1e-12) * tt));
    m_drift = std::max(
        m_drift, std::abs(s.mass - log.initial_mass) / (log.initial_mass * tt));
  }
  log.energy_drift_per_time = e_drift;
  log.mass_drift_per_time = m_drift;
  return log;
}

std::pair<bool, double> detect_blowup(const RunLog& log,
                                      const EvolveConfig& cfg) {
  if (log.snaps.empty()) return {false, 0.0};
  double grad0 = log.snaps.front().grad_norm;
  for (const Snapshot& s : log.snaps) {
    if (s.grad_norm > cfg.blowup_grad_factor * grad0 ||
        s.band_fraction > cfg.band_fraction_flag)
      return {true, s.time};
  }
  return {false, 0.0};
}

CollapseFit fit_collapse(const std::vector<double>& times,
                         const std::vector<double>& m_series, double s) {
  if (times.size() != m_series.size() || times.size() < 8)
    throw convergence_error("fit_collapse: series too short");
  // largest strictly-decreasing negative suffix
  std::size_t n = m_series.size();
  std::size_t i0 = n;
  for (std::size_t i = n; i-- > 0;) {
    if (m_series[i] >= 0.0) break;
    if (i + 1 < n && m_series[i] <= m_series[i + 1]) break;
    i0 = i;
  }
  if (n - i0 < 8)
    throw convergence_error(
        "fit_collapse: tail not negative and decreasing (fit rejected)");

  const double expo = 1.0 - 2.0 * s;  // negative for s > 1/2
  std::vector<double> tt(times.begin() + i0, times.end());
  std::vector<double> mm(m_series.begin() + i0, m_series.end());
  const double t_end = tt.back();
  const double span = t_end - tt.front();

  auto sse_logc = [&](double t_star) {
    double mean = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i)
      mean += std::log(-mm[i]) - expo * std::log(t_star - tt[i]);
    mean /= tt.size();
    double sse = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
      double r = std::log(-mm[i]) - expo * std::log(t_star - tt[i]) - mean;
      sse += r * r;
    }
    return std::pair<double, double>(sse, mean);
  };

  // golden-section over t* in (t_end, t_end + 10 span]
  double lo = t_end + 1e-9 * std::max(span, 1.0), hi = t_end + 10.0 * span;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = sse_logc(a).first, fb = sse_logc(b).first;
  for (int it = 0; it < 200; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = sse_logc(a).first;
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = sse_logc(b).first;
    }
  }
  double t_star = 0.5 * (lo + hi);
  auto [sse, logc] = sse_logc(t_star);

  CollapseFit fit;
  fit.t_star = t_star;
  fit.c = std::exp(logc);
  fit.points = static_cast<int>(tt.size());
  fit.rms_log_residual = std::sqrt(sse / tt.size());

  // relative RMS over the final decade of t* - t
  double d_min = t_star - t_end;
  double acc = 0.0;
  int cnt = 0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    double d = t_star - tt[i];
    if (d < 10.0 * d_min) {
      double model = -fit.c * std::pow(d, expo);
      double rel = (mm[i] - model) / model;
      acc += rel * rel;
      ++cnt;
    }
  }
  fit.final_decade_residual = cnt > 0 ? std::sqrt(acc / cnt) : 0.0;
  return fit;
}

MonotonicityReport monotonicity_report(const RunLog& log, const FracParams& p,
                                       double slack_frac, double gn_c) {
  MonotonicityReport rep;
  const double delta = p.delta();
  rep.critical = std::abs(delta) < 1e-10;
  const double e0 = log.initial_energy;
  const double core0 = rep.critical ? 4.0 * p.s * e0
                                    : 4.0 * p.sigma * p.dim * e0;
  rep.slack_allowance = slack_frac * std::abs(core0);

  double min_grad = std::numeric_limits<double>::infinity();
  for (const Snapshot& s : log.snaps)
    min_grad = std::min(min_grad, s.grad_norm);
  rep.min_grad = min_grad;
  if (gn_c > 0.0 && e0 < 0.0 && delta > 0.0) {
    // E < 0 forces a positive floor through the sharp inequality:
    // grad > [ (sigma+1) / (C M^{(sigma/s)(s-s_c)}) ]^{s/(sigma N - 2s)}
    double mexp = (p.sigma / p.s) * (p.s - p.s_c());
    rep.grad_floor =
        std::pow((p.sigma + 1.0) /
                     (gn_c * std::pow(log.initial_mass, mexp)),
                 p.s / delta);
  }

  for (std::size_t r = 0; r < log.r_list.size(); ++r) {
    MonotonicityPerR pr;
    pr.R = log.r_list[r];
    int ok = 0;
    for (std::size_t i = 1; i + 1 < log.snaps.size(); ++i) {
      const Snapshot& sm = log.snaps[i - 1];
      const Snapshot& s0 = log.snaps[i];
      const Snapshot& sp = log.snaps[i + 1];
      if (s0.band_fraction > 0.01) break;  // resolved window only
      double dm = sp.time - s0.time, dp = s0.time - sm.time;
      // nonuniform centered difference
      double fd = (sp.m_r[r] * dp * dp - sm.m_r[r] * dm * dm +
                   s0.m_r[r] * (dm * dm - dp * dp)) /
                  (dm * dp * (dm + dp));
      double bound;
      if (rep.critical) {
        bound = 4.0 * p.s * e0 + rep.slack_allowance;
      } else {
        bound = 4.0 * p.sigma * p.dim * e0 -
                2.0 * delta * s0.grad_norm * s0.grad_norm +
                rep.slack_allowance;
        if (!s0.err_terms.empty()) bound += s0.err_terms[r];
      }
      ++pr.checked;
      if (fd <= bound) ++ok;
      pr.max_needed_slack =
          std::max(pr.max_needed_slack, fd - (bound - rep.slack_allowance));
    }
    pr.fraction_ok = pr.checked > 0 ? double(ok) / pr.checked : 1.0;

    // monotone decreasing after the running maximum, which must occur in the
    // first half of the logged window
    std::size_t imax = 0;
    for (std::size_t i = 0; i < log.snaps.size(); ++i)
      if (log.snaps[i].m_r[r] > log.snaps[imax].m_r[r]) imax = i;
    bool mono = imax <= log.snaps.size() / 2;
    for (std::size_t i = imax; mono && i + 1 < log.snaps.size(); ++i)
      if (log.snaps[i + 1].m_r[r] >
          log.snaps[i].m_r[r] + 1e-9 * std::abs(log.snaps[i].m_r[r]))
        mono = false;
    pr.monotone_after_transient = mono;
    rep.per_r.push_back(pr);
  }
  return rep;
}

std::string run_log_csv(const RunLog& log) {
  std::ostringstream out;
  out << "time,energy,mass,grad_norm,boundary_mass,band_fraction,max_amp,dt";
  for (double R : log.r_list) out << ",m_r_" << csv_num(R);
  for (double R : log.r_list) out << ",rhs_" << csv_num(R);
  out << "\r\n";
  for (const Snapshot& s : log.snaps) {
    out << csv_num(s.time) << ',' << csv_num(s.energy) << ','
        << csv_num(s.mass) << ',' << csv_num(s.grad_norm) << ','
        << csv_num(s.boundary_mass) << ',' << csv_num(s.band_fraction) << ','
        << csv_num(s.max_amp) << ',' << csv_num(s.dt);
    for (double v : s.m_r) out << ',' << csv_num(v);
    for (double v : s.rhs) out << ',' << csv_num(v);
    out << "\r\n";
  }
  return out.str();
}

}  // namespace fracvirial
