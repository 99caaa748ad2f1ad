#include "fracvirial/domain.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fracvirial/io.hpp"

namespace fracvirial {

IntervalDomain::IntervalDomain(double a_, double b_, int points_)
    : a(a_), b(b_), points(points_) {
  if (!(a < 0.0 && 0.0 < b))
    throw invalid_input("IntervalDomain: need a < 0 < b (star-shaped)");
  if (points < 32) throw invalid_input("IntervalDomain: need M >= 32");
}

double riesz_constant_1d(double s) {
  // c_{1,s} = 4^s s Gamma(1/2+s) / (sqrt(pi) Gamma(1-s))
  return std::pow(4.0, s) * s * std::tgamma(0.5 + s) /
         (std::sqrt(M_PI) * std::tgamma(1.0 - s));
}

namespace {

// antiderivatives of the kernel z^{-1-2s}
inline double kernel_int0(double z, double s) {  // int z^{-1-2s} dz
  return std::pow(z, -2.0 * s) / (-2.0 * s);
}
inline double kernel_int1(double z, double s) {  // int z^{-2s} dz
  if (std::abs(1.0 - 2.0 * s) < 1e-12) return std::log(z);
  return std::pow(z, 1.0 - 2.0 * s) / (1.0 - 2.0 * s);
}

}  // namespace

DirichletFracOperator assemble(const IntervalDomain& dom, double s) {
  if (!(s > 0.0 && s < 1.0)) throw invalid_input("assemble: need s in (0,1)");
  const int n = dom.interior();
  const int M = dom.points;
  const double h = dom.h();
  const double c = riesz_constant_1d(s);

  // weight of the sampled second difference G_k = 2u_i - u_{i+k} - u_{i-k}:
  // piece [kh,(k+1)h] distributes to G_k and G_{k+1} by linear interpolation;
  // the singular cell [0,h] uses the quadratic model G ~ G_1 (z/h)^2.
  std::vector<double> a_w(M + 1, 0.0), b_w(M + 1, 0.0);
  for (int k = 1; k <= M - 1; ++k) {
    double z0 = k * h, z1 = (k + 1) * h;
    double i0 = kernel_int0(z1, s) - kernel_int0(z0, s);
    double i1 = kernel_int1(z1, s) - kernel_int1(z0, s);
    // int (z - kh) z^{-1-2s} / h and int ((k+1)h - z) z^{-1-2s} / h
    b_w[k] = (i1 - k * h * i0) / h;
    a_w[k] = ((k + 1) * h * i0 - i1) / h;
  }
  std::vector<double> omega(M + 1, 0.0);
  omega[1] = std::pow(h, -2.0 * s) / (2.0 - 2.0 * s) + a_w[1];
  for (int k = 2; k <= M; ++k) omega[k] = b_w[k - 1] + a_w[k];

  DirichletFracOperator op;
  op.domain = dom;
  op.s = s;
  op.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i <= n; ++i) {
    int K = std::max(i, M - i);  // beyond K h both references are exterior
    double diag = 0.0;
    for (int k = 1; k < K; ++k) diag += 2.0 * omega[k];
    diag += 2.0 * b_w[K - 1];                        // G_K = 2 u_i exactly
    diag += std::pow(K * h, -2.0 * s) / s;           // analytic tail
    op.matrix(i - 1, i - 1) = c * diag;
    for (int k = 1; k < K; ++k) {
      double w = c * omega[k];
      if (i + k <= n) op.matrix(i - 1, i + k - 1) -= w;
      if (i - k >= 1) op.matrix(i - 1, i - k - 1) -= w;
    }
  }
  op.matrix = 0.5 * (op.matrix + op.matrix.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
  if (es.info() != Eigen::Success)
    throw instability_error("assemble: eigendecomposition failed");
  op.eigenvalues = es.eigenvalues();
  op.eigenvectors = es.eigenvectors();
  if (op.eigenvalues(0) <= 0.0)
    throw construction_error("assemble: smallest eigenvalue not positive");
  return op;
}

double domain_mass(const DomainState& u) {
  return u.domain.h() * u.values.squaredNorm();
}

double domain_form(const DomainState& u, const DirichletFracOperator& op) {
  Eigen::VectorXcd au = op.matrix * u.values;
  return u.domain.h() * u.values.dot(au).real();
}

double domain_energy(const DomainState& u, const DirichletFracOperator& op,
                     double sigma) {
  double pwr = 2.0 * sigma + 2.0;
  double nl = 0.0;
  for (int i = 0; i < u.values.size(); ++i)
    nl += std::pow(std::abs(u.values(i)), pwr);
  return 0.5 * domain_form(u, op) - u.domain.h() * nl / pwr;
}

double virial_omega(const DomainState& u) {
  const int n = static_cast<int>(u.values.size());
  const double h = u.domain.h();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx up = i + 1 < n ? u.values(i + 1) : cplx(0.0);
    cplx um = i - 1 >= 0 ? u.values(i - 1) : cplx(0.0);
    cplx du = (up - um) / (2.0 * h);
    double x = u.domain.node(i + 1);
    acc += (std::conj(u.values(i)) * (x * du)).imag();
  }
  return 2.0 * h * acc;
}

DomainRunLog evolve_domain(const DomainState& u0,
                           const DirichletFracOperator& op, double sigma,
                           const DomainEvolveConfig& cfg) {
  DomainRunLog log;
  DomainState u = u0;
  log.initial_energy = domain_energy(u, op, sigma);
  log.initial_mass = domain_mass(u);
  log.initial_form = domain_form(u, op);

  auto snapshot = [&](double now, double used_dt) {
    DomainSnapshot s;
    s.time = now;
    s.dt = used_dt;
    s.energy = domain_energy(u, op, sigma);
    s.mass = domain_mass(u);
    s.form = domain_form(u, op);
    s.virial = virial_omega(u);
    s.max_amp = u.values.cwiseAbs().maxCoeff();
    log.snaps.push_back(s);
  };
  snapshot(0.0, cfg.dt);

  auto nl_half = [&](double dt) {
    if (cfg.coupling == 0.0) return;
    for (int i = 0; i < u.values.size(); ++i) {
      double a2s = std::pow(std::abs(u.values(i)), 2.0 * sigma);
      u.values(i) *= std::polar(1.0, 0.5 * dt * cfg.coupling * a2s);
    }
  };

  double t = 0.0, dt = cfg.dt;
  long long count = 0;
  while (t < cfg.t_max - 1e-14) {
    if (cfg.coupling != 0.0) {
      double amp = u.values.cwiseAbs().maxCoeff();
      while (dt * cfg.coupling * std::pow(amp, 2.0 * sigma) >
             cfg.max_phase_per_step)
        dt *= 0.5;
    }
    double step_dt = std::min(dt, cfg.t_max - t);
    nl_half(step_dt);
    // real eigenbasis applied to re/im parts separately
    Eigen::VectorXd cr = op.eigenvectors.transpose() * u.values.real();
    Eigen::VectorXd ci = op.eigenvectors.transpose() * u.values.imag();
    for (int k = 0; k < cr.size(); ++k) {
      cplx rot = std::polar(1.0, -step_dt * op.eigenvalues(k)) *
                 cplx(cr(k), ci(k));
      cr(k) = rot.real();
      ci(k) = rot.imag();
    }
    u.values = (op.eigenvectors * cr).cast<cplx>() +
               cplx(0.0, 1.0) * (op.eigenvectors * ci).cast<cplx>();
    nl_half(step_dt);
    t += step_dt;
    ++count;
    if (!u.values.allFinite()) {
      log.instability_flag = true;
      log.abort_reason = "non-finite values after step";
      break;
    }
    if (count % cfg.snapshot_stride == 0 || t >= cfg.t_max - 1e-14) {
      snapshot(t, step_dt);
      const DomainSnapshot& s = log.snaps.back();
      if (s.form > cfg.blowup_form_factor * log.initial_form) {
        log.blowup_flag = true;
        log.blowup_time = t;
        break;
      }
      double scale = std::max(std::abs(log.initial_energy), 1e-12);
      if (std::abs(s.energy - log.initial_energy) /
              (scale * std::max(t, 1.0)) >
          100.0 * cfg.conservation_tol) {
        log.instability_flag = true;
        log.abort_reason = "conservation drift beyond 100x tolerance";
        break;
      }
    }
  }
  log.steps = count;
  for (const DomainSnapshot& s : log.snaps) {
    if (s.time <= 0.0) continue;
    double tt = std::max(s.time, 1e-12);
    log.energy_drift_per_time = std::max(
        log.energy_drift_per_time,
        std::abs(s.energy - log.initial_energy) /
            (std::max(std::abs(log.initial_energy), 1e-12) * tt));
    log.mass_drift_per_time =
        std::max(log.mass_drift_per_time,
                 std::abs(s.mass - log.initial_mass) / (log.initial_mass * tt));
  }
  return log;
}

PohozaevReport pohozaev_estimate_check(const DomainState& u,
                                       const DirichletFracOperator& op) {
  const int n = static_cast<int>(u.values.size());
  const double h = u.domain.h();
  Eigen::VectorXcd au = op.matrix * u.values;
  PohozaevReport rep;
  double lhs = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx up = i + 1 < n ? u.values(i + 1) : cplx(0.0);
    cplx um = i - 1 >= 0 ? u.values(i - 1) : cplx(0.0);
    cplx du = (up - um) / (2.0 * h);
    double x = u.domain.node(i + 1);
    lhs += (x * du * std::conj(au(i))).real();
  }
  rep.lhs = h * lhs;
  double form = h * u.values.dot(au).real();
  rep.rhs = 0.5 * (2.0 * op.s - 1.0) * form;
  rep.slack = rep.rhs - rep.lhs;
  rep.tol_disc = 10.0 * std::pow(h, std::min(2.0 * op.s, 1.0)) * form;
  return rep;
}

DomainMonotonicityReport monotonicity_omega(const DomainRunLog& log, double s,
                                            double sigma, double slack_frac) {
  DomainMonotonicityReport rep;
  const double e0 = log.initial_energy;
  const double core0 = 4.0 * sigma * e0;  // N = 1
  rep.slack_allowance = slack_frac * std::abs(core0);
  rep.min_form = std::numeric_limits<double>::infinity();
  for (const DomainSnapshot& sn : log.snaps)
    rep.min_form = std::min(rep.min_form, sn.form);

  int ok = 0;
  for (std::size_t i = 1; i + 1 < log.snaps.size(); ++i) {
    const DomainSnapshot& sm = log.snaps[i - 1];
    const DomainSnapshot& s0 = log.snaps[i];
    const DomainSnapshot& sp = log.snaps[i + 1];
    double dm = sp.time - s0.time, dp = s0.time - sm.time;
    double fd = (sp.virial * dp * dp - sm.virial * dm * dm +
                 s0.virial * (dm * dm - dp * dp)) /
                (dm * dp * (dm + dp));
    double bound = 4.0 * sigma * e0 - 2.0 * (sigma - 2.0 * s) * s0.form +
                   rep.slack_allowance;
    ++rep.checked;
    if (fd <= bound) ++ok;
    rep.max_needed_slack =
        std::max(rep.max_needed_slack, fd - (bound - rep.slack_allowance));
  }
  rep.fraction_ok = rep.checked > 0 ? double(ok) / rep.checked : 1.0;

  std::size_t imax = 0;
  for (std::size_t i = 0; i < log.snaps.size(); ++i)
    if (log.snaps[i].virial > log.snaps[imax].virial) imax = i;
  bool mono = imax <= log.snaps.size() / 2;
  for (std::size_t i = imax; mono && i + 1 < log.snaps.size(); ++i)
    if (log.snaps[i + 1].virial >
        log.snaps[i].virial + 1e-9 * std::abs(log.snaps[i].virial))
      mono = false;
  rep.virial_decreasing = mono;
  return rep;
}

DomainState random_domain_bump(const IntervalDomain& dom, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int modes = 5;
  std::vector<cplx> coef(modes);
  for (auto& z : coef) z = cplx(gauss(rng), gauss(rng));
  DomainState u(dom);
  const double len = dom.b - dom.a;
  for (int i = 1; i <= dom.interior(); ++i) {
    double x = dom.node(i);
    // (x-a)^2 (b-x)^2 envelope keeps the state compactly in H^1_0-style
    double env = (x - dom.a) * (x - dom.a) * (dom.b - x) * (dom.b - x) /
                 std::pow(len / 2.0, 4.0);
    cplx val = 0.0;
    for (int m2 = 0; m2 < modes; ++m2)
      val += coef[m2] * std::cos((m2 + 1) * M_PI * (x - dom.a) / len);
    u.values(i - 1) = env * val;
  }
  return u;
}

double zero_energy_amplitude_domain(const DomainState& shape,
                                    const DirichletFracOperator& op,
                                    double sigma) {
  double a = 0.5 * domain_form(shape, op);
  double pwr = 2.0 * sigma + 2.0;
  double b = 0.0;
  for (int i = 0; i < shape.values.size(); ++i)
    b += std::pow(std::abs(shape.values(i)), pwr);
  b *= shape.domain.h() / pwr;
  if (!(a > 0.0 && b > 0.0))
    throw invalid_input("zero_energy_amplitude_domain: degenerate shape");
  // E[lam u] = lam^2 a - lam^{2 sigma+2} b
  double lo = 1e-6, hi = 1.0;
  auto e_at = [&](double lam) {
    return lam * lam * a - std::pow(lam, pwr) * b;
  };
  while (e_at(hi) > 0.0) hi *= 2.0;
  while (e_at(lo) < 0.0) lo *= 0.5;
  while (hi - lo > 1e-6 * hi) {
    double mid = 0.5 * (lo + hi);
    (e_at(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string domain_log_csv(const DomainRunLog& log) {
  std::ostringstream out;
  out << "time,energy,mass,form,virial,max_amp,dt\r\n";
  for (const DomainSnapshot& s : log.snaps)
    out << csv_num(s.time) << ',' << csv_num(s.energy) << ','
        << csv_num(s.mass) << ',' << csv_num(s.form) << ','
        << csv_num(s.virial) << ',' << csv_num(s.max_amp) << ','
        << csv_num(s.dt) << "\r\n";
  return out.str();
}

std::string eigenvalues_csv(const DirichletFracOperator& op, int count) {
  std::ostringstream out;
  out << "k,lambda\r\n";
  int n = std::min<int>(count, static_cast<int>(op.eigenvalues.size()));
  for (int k = 0; k < n; ++k)
    out << (k + 1) << ',' << csv_num(op.eigenvalues(k)) << "\r\n";
  return out.str();
}

}  // namespace fracvirial
