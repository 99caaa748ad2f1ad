#include "fracvirial/cutoff.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fracvirial/fft.hpp"
#include "fracvirial/io.hpp"

namespace fracvirial {

namespace {
const double kR0 = 1.0 + 1.0 / std::sqrt(3.0);
const double kRout = 10.0;
const double kH = kRout - kR0;
const double kA = 2.0 * std::sqrt(3.0);
}  // namespace

CutoffProfile::CutoffProfile() {
  // b from the total-drop condition g(10) = 0:
  //   int_{r0}^{10} (-g') dr = g(r0) = r0 - (r0-1)^3
  const double g_r0 = kR0 - std::pow(kR0 - 1.0, 3);
  bridge_b_ = (g_r0 / (kH * kH) - kA / 182.0) * 1365.0 / kH;
  if (!(bridge_b_ > 0.0))
    throw construction_error("cutoff bridge: drop condition gives b <= 0");

  phi_r0_ = 0.5 * kR0 * kR0 - 0.25 * std::pow(kR0 - 1.0, 4);
  // phi(10) = phi(r0) + int_0^h g(w-basis) dw
  const double a = kA, b = bridge_b_, h = kH;
  auto g_integral = [&](double w) {
    return std::pow(h, -12.0) *
           (h * (a + b * h) * std::pow(w, 14.0) / (13.0 * 14.0) -
            (a + 2.0 * b * h) * std::pow(w, 15.0) / (14.0 * 15.0) +
            b * std::pow(w, 16.0) / (15.0 * 16.0));
  };
  phi_inf_ = phi_r0_ + g_integral(h);

  // serializable piece list (coefficients of g and phi in local variables)
  pieces_.clear();
  pieces_.push_back({0.0, 1.0, 0.0, 1.0, {0.0, 1.0}, {0.0, 0.0, 0.5}});
  // g = (1+t) - t^3, phi = (1+t)^2/2 - t^4/4 in t = r-1
  pieces_.push_back({1.0, kR0, 1.0, 1.0,
                     {1.0, 1.0, 0.0, -1.0},
                     {0.5, 1.0, 0.5, 0.0, -0.25}});
  {
    const double hm12 = std::pow(h, -12.0);
    std::vector<double> gc(16, 0.0), pc(17, 0.0);
    gc[13] = hm12 * h * (a + b * h) / 13.0;
    gc[14] = -hm12 * (a + 2.0 * b * h) / 14.0;
    gc[15] = hm12 * b / 15.0;
    // phi(r) = phi_inf - int_0^w g dw' in w = 10-r
    pc[0] = phi_inf_;
    pc[14] = -hm12 * h * (a + b * h) / (13.0 * 14.0);
    pc[15] = hm12 * (a + 2.0 * b * h) / (14.0 * 15.0);
    pc[16] = -hm12 * b / (15.0 * 16.0);
    pieces_.push_back({kR0, kRout, kRout, -1.0, gc, pc});
  }
  pieces_.push_back({kRout, std::numeric_limits<double>::infinity(), kRout,
                     1.0,
                     {0.0},
                     {phi_inf_}});

  verify();
}

CutoffProfile::Values CutoffProfile::eval(double r) const {
  Values v{};
  if (r < 0.0) throw invalid_input("CutoffProfile: r must be >= 0");
  if (r <= 1.0) {
    v.g = r;
    v.gp = 1.0;
    v.gpp = 0.0;
    v.gppp = 0.0;
    v.phi = 0.5 * r * r;
  } else if (r <= kR0) {
    double t = r - 1.0;
    v.g = r - t * t * t;
    v.gp = 1.0 - 3.0 * t * t;
    v.gpp = -6.0 * t;
    v.gppp = -6.0;
    v.phi = 0.5 * r * r - 0.25 * t * t * t * t;
  } else if (r < kRout) {
    const double a = kA, b = bridge_b_, h = kH;
    const double w = kRout - r;
    const double hm12 = std::pow(h, -12.0);
    const double w10 = std::pow(w, 10.0);
    const double w11 = w10 * w, w12 = w11 * w, w13 = w12 * w, w14 = w13 * w,
                 w15 = w14 * w;
    const double c0 = h * (a + b * h), c1 = a + 2.0 * b * h, c2 = b;
    v.g = hm12 * (c0 * w13 / 13.0 - c1 * w14 / 14.0 + c2 * w15 / 15.0);
    // d/dr = -d/dw
    v.gp = hm12 * (-c0 * w12 + c1 * w13 - c2 * w14);
    v.gpp = hm12 * (12.0 * c0 * w11 - 13.0 * c1 * w12 + 14.0 * c2 * w13);
    v.gppp = hm12 * (-132.0 * c0 * w10 + 156.0 * c1 * w11 - 182.0 * c2 * w12);
    v.phi = phi_inf_ - hm12 * (c0 * w14 / (13.0 * 14.0) -
                               c1 * w15 / (14.0 * 15.0) +
                               c2 * w15 * w / (15.0 * 16.0));
  } else {
    v.g = v.gp = v.gpp = v.gppp = 0.0;
    v.phi = phi_inf_;
  }
  return v;
}

double CutoffProfile::psi1(double r) const { return 1.0 - eval(r).gp; }

double CutoffProfile::psi2(double r, int N) const {
  Values v = eval(r);
  double g_over_r = r > 1e-12 ? v.g / r : 1.0;  // g ~ r at the origin
  return (1.0 - v.gp) + (N - 1) * (1.0 - g_over_r);
}

double CutoffProfile::bilaplacian(double r, int N) const {
  if (r <= 1.0 || r >= kRout) return 0.0;  // quadratic core / constant tail
  Values v = eval(r);
  double n1 = N - 1.0;
  // Lap^2 phi = g''' + (N-1)(2g''/r - 2g'/r^2 + 2g/r^3)
  //           + (N-1)^2 (g'/r^2 - g/r^3)
  return v.gppp +
         n1 * (2.0 * v.gpp / r - 2.0 * v.gp / (r * r) +
               2.0 * v.g / (r * r * r)) +
         n1 * n1 * (v.gp / (r * r) - v.g / (r * r * r));
}

void CutoffProfile::verify() const {
  const double junction_tol = 1e-10;
  auto match = [&](double r) {
    Values lo = eval(r - 1e-13), hi = eval(r + 1e-13);
    if (std::abs(lo.g - hi.g) > junction_tol ||
        std::abs(lo.gp - hi.gp) > junction_tol ||
        std::abs(lo.gpp - hi.gpp) > junction_tol)
      throw construction_error("cutoff profile not C^2 at r=" +
                               std::to_string(r));
  };
  match(1.0);
  match(kR0);
  match(kRout);

  const int n = 10000;
  for (int i = 0; i <= n; ++i) {
    double r = 12.0 * i / n;
    Values v = eval(r);
    if (v.gp > 1.0 + 1e-12)
      throw construction_error("cutoff profile violates phi'' <= 1");
    if (r > kR0 + 1e-9 && r < kRout - 1e-9 && !(v.gp < 0.0))
      throw construction_error("cutoff bridge violates g' < 0 at r=" +
                               std::to_string(r));
    if (r > 1e-9 && v.g / r > 1.0 + 1e-12)
      throw construction_error("cutoff profile violates phi'/r <= 1");
  }
}

RescaledCutoff::RescaledCutoff(const CutoffProfile& p, double R_)
    : base(&p), R(R_) {
  if (!(R > 0.0)) throw invalid_input("RescaledCutoff: need R > 0");
}

CutoffFields eval_on_grid(const RescaledCutoff& c, const Grid& grid) {
  if (CutoffProfile::outer_radius() * c.R > grid.half_length)
    throw construction_error(
        "cutoff support error: 10R exceeds the box half-length");
  const int M = grid.points_per_dim;
  const int N = grid.dim;
  CutoffFields f;
  f.grid = grid;
  f.R = c.R;
  f.grad.assign(N, std::vector<double>(grid.size(), 0.0));
  f.hess.assign(grid.size() * (N == 1 ? 1 : 3), 0.0);
  f.phi_rr.assign(grid.size(), 0.0);
  f.lap.assign(grid.size(), 0.0);
  f.bilap.assign(grid.size(), 0.0);
  f.psi1.assign(grid.size(), 0.0);
  f.psi2.assign(grid.size(), 0.0);

  auto fill_point = [&](std::size_t idx, double x, double y) {
    double r = N == 1 ? std::abs(x) : std::hypot(x, y);
    double rho = r / c.R;
    CutoffProfile::Values v = c.base->eval(rho);
    double dphi_over_r = rho > 1e-12 ? v.g / rho : 1.0;  // phi_R'(r)/r
    f.phi_rr[idx] = v.gp;
    f.lap[idx] = v.gp + (N - 1) * dphi_over_r;
    f.psi1[idx] = 1.0 - v.gp;
    f.psi2[idx] = N - f.lap[idx];
    f.bilap[idx] = c.base->bilaplacian(rho, N) / (c.R * c.R);
    if (N == 1) {
      f.grad[0][idx] = c.R * v.g * (x >= 0 ? 1.0 : -1.0);
      f.hess[idx] = v.gp;
    } else {
      // grad phi_R = R g(rho) x/|x|;  Hessian of a radial function:
      // H_kl = (delta_kl - x_k x_l/r^2) phi_R'/r + x_k x_l/r^2 phi_R''
      if (r > 1e-14) {
        f.grad[0][idx] = c.R * v.g * x / r;
        f.grad[1][idx] = c.R * v.g * y / r;
        double cxx = x * x / (r * r), cyy = y * y / (r * r),
               cxy = x * y / (r * r);
        f.hess[3 * idx + 0] = (1.0 - cxx) * dphi_over_r + cxx * v.gp;
        f.hess[3 * idx + 1] = -cxy * dphi_over_r + cxy * v.gp;
        f.hess[3 * idx + 2] = (1.0 - cyy) * dphi_over_r + cyy * v.gp;
      } else {
        f.hess[3 * idx + 0] = 1.0;
        f.hess[3 * idx + 2] = 1.0;
      }
    }
  };

  if (N == 1) {
    for (int i = 0; i < M; ++i) fill_point(i, grid.coord(i), 0.0);
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        fill_point(static_cast<std::size_t>(i) * M + j, grid.coord(i),
                   grid.coord(j));
  }

  // Lap phi_R spectrum on the 2x grid, for the alias-free biharmonic pairing
  f.fine_grid = Grid(N, grid.half_length, 2 * M);
  FieldOnGrid lap_fine(f.fine_grid);
  const int MF = f.fine_grid.points_per_dim;
  auto lap_at = [&](double x, double y) {
    double r = N == 1 ? std::abs(x) : std::hypot(x, y);
    double rho = r / c.R;
    CutoffProfile::Values v = c.base->eval(rho);
    double dphi_over_r = rho > 1e-12 ? v.g / rho : 1.0;
    return v.gp + (N - 1) * dphi_over_r;
  };
  if (N == 1) {
    for (int i = 0; i < MF; ++i)
      lap_fine.values[i] = lap_at(f.fine_grid.coord(i), 0.0);
  } else {
    for (int i = 0; i < MF; ++i)
      for (int j = 0; j < MF; ++j)
        lap_fine.values[static_cast<std::size_t>(i) * MF + j] =
            lap_at(f.fine_grid.coord(i), f.fine_grid.coord(j));
  }
  forward_fft(lap_fine);
  f.lap_fine_hat = std::move(lap_fine.values);
  return f;
}

PsiMarginReport verify_psi_inequality(const RescaledCutoff& c, double eta,
                                      double s, int N) {
  if (N / (2.0 * s) < 1.0)
    throw invalid_input("verify_psi_inequality: needs N/(2s) >= 1");
  const double c_eta = eta / (N + 2.0 * s);
  const double pw = N / (2.0 * s);
  // margin is scale invariant: psi_{j,R}(r) = psi_j(r/R); scan rho in [0,12]
  const int n = 20000;
  double min_margin = std::numeric_limits<double>::infinity();
  double arg_min = 0.0;
  for (int i = 0; i <= n; ++i) {
    double rho = 12.0 * i / n;
    double p1 = c.base->psi1(rho);
    double p2 = c.base->psi2(rho, N);
    double margin = p1 - c_eta * (p2 > 0.0 ? std::pow(p2, pw) : 0.0);
    if (margin < min_margin) {
      min_margin = margin;
      arg_min = rho * c.R;
    }
  }
  return {min_margin, arg_min, eta, c_eta};
}

double find_eta(const CutoffProfile& profile, double s, int N) {
  RescaledCutoff c1(profile, 1.0), c4(profile, 4.0);
  auto admissible = [&](double eta) {
    return verify_psi_inequality(c1, eta, s, N).min_margin >= 0.0 &&
           verify_psi_inequality(c4, eta, s, N).min_margin >= 0.0;
  };
  // margin at r >= 10 is 1 - c(eta) N^{N/2s}, so this cap is inadmissible
  double hi = 2.0 * (N + 2.0 * s) / std::pow(double(N), N / (2.0 * s));
  double lo = 0.0;
  while (hi - lo > 1e-3 * hi) {
    double mid = 0.5 * (lo + hi);
    (admissible(mid) ? lo : hi) = mid;
  }
  if (lo < 1e-8)
    throw convergence_error("find_eta: no admissible eta above 1e-8");
  return 0.9 * lo;
}

std::string profile_csv(const CutoffProfile& p, double eta, double s, int N,
                        int samples) {
  double c_eta = eta / (N + 2.0 * s);
  std::ostringstream out;
  out << "r,g,gp,phi,phipp,psi1,psi2,margin\r\n";
  for (int i = 0; i <= samples; ++i) {
    double r = 12.0 * i / samples;
    auto v = p.eval(r);
    double p1 = p.psi1(r), p2 = p.psi2(r, N);
    double margin =
        p1 - c_eta * (p2 > 0.0 ? std::pow(p2, N / (2.0 * s)) : 0.0);
    out << csv_num(r) << ',' << csv_num(v.g) << ',' << csv_num(v.gp) << ','
        << csv_num(v.phi) << ',' << csv_num(v.gp) << ',' << csv_num(p1) << ','
        << csv_num(p2) << ',' << csv_num(margin) << "\r\n";
  }
  return out.str();
}

std::string profile_json(const CutoffProfile& p) {
  nlohmann::json j;
  j["r0"] = CutoffProfile::junction_r0();
  j["outer_radius"] = CutoffProfile::outer_radius();
  j["phi_at_infinity"] = p.phi_at_infinity();
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& pc : p.pieces()) {
    nlohmann::json e;
    e["interval"] = {pc.lo, std::isfinite(pc.hi) ? pc.hi : -1.0};
    e["origin"] = pc.origin;
    e["sign"] = pc.sign;
    e["g_coeffs"] = pc.g_coeffs;
    e["phi_coeffs"] = pc.phi_coeffs;
    pieces.push_back(e);
  }
  j["pieces"] = pieces;
  return j.dump(2);
}

}  // namespace fracvirial
