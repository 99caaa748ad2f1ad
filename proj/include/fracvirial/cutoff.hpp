#pragma once
#include <string>
#include <vector>

#include "fracvirial/grid.hpp"

namespace fracvirial {

// Radial virial weight phi with phi(r) = r^2/2 for r <= 1, constant for
// r >= 10, phi'' <= 1 everywhere; built from g = phi' with
//   g(r) = r                      on [0,1]
//   g(r) = r - (r-1)^3            on (1, 1+1/sqrt(3)]
//   g(r) = monotone C^2 bridge    on (1+1/sqrt(3), 10)
//   g(r) = 0                      on [10, inf)
// The bridge integrates g'(r) = -(r-r0) (1-(r-r0)/h)^12 (a + b (r-r0)),
// a = 2 sqrt(3) (matches g'' at r0), b fixed by g(10) = 0; with a,b > 0 this
// gives g' < 0 strictly inside the bridge. Stored in powers of (10-r), which
// keeps the evaluation well conditioned near r = 10.
class CutoffProfile {
 public:
  struct Values {
    double g, gp, gpp, gppp, phi;
  };

  CutoffProfile();  // builds and runs the verification grid; throws
                    // construction_error on any violated profile property

  Values eval(double r) const;
  double g(double r) const { return eval(r).g; }
  double phi(double r) const { return eval(r).phi; }
  double phi_at_infinity() const { return phi_inf_; }

  static double junction_r0() { return 1.0 + 1.0 / std::sqrt(3.0); }
  static double outer_radius() { return 10.0; }

  // psi1 = 1 - phi'', psi2 = N - Lap phi (R = 1 normalization; both are
  // invariant under the rescaling r -> r/R).
  double psi1(double r) const;
  double psi2(double r, int N) const;
  // radial biharmonic of phi at R = 1
  double bilaplacian(double r, int N) const;

  // Piece descriptions for serialization: polynomial coefficients of g in the
  // local variable t = sign*(r - origin).
  struct Piece {
    double lo, hi, origin, sign;
    std::vector<double> g_coeffs;
    std::vector<double> phi_coeffs;
  };
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  double bridge_b_;
  double phi_r0_, phi_inf_;
  std::vector<Piece> pieces_;
  void verify() const;
};

// phi_R(r) = R^2 phi(r/R)
struct RescaledCutoff {
  const CutoffProfile* base;
  double R;

  RescaledCutoff(const CutoffProfile& p, double R_);

  double phi(double r) const { return R * R * base->phi(r / R); }
  double dphi(double r) const { return R * base->g(r / R); }
  double d2phi(double r) const { return base->eval(r / R).gp; }
  double psi1(double r) const { return base->psi1(r / R); }
  double psi2(double r, int N) const { return base->psi2(r / R, N); }
  double laplacian(double r, int N) const {
    return static_cast<double>(N) - psi2(r, N);
  }
  double bilaplacian(double r, int N) const {
    return base->bilaplacian(r / R, N) / (R * R);
  }
};

// Cutoff fields sampled exactly from the piecewise polynomials on a grid.
// The biharmonic pairing integrates by parts (int Lap^2 phi |v|^2 =
// int Lap phi Lap |v|^2 on the torus), so Lap phi_R is also sampled on a
// 2x-oversampled grid where |v|^2 of a dealiased v is alias-free.
struct CutoffFields {
  Grid grid;
  double R;
  std::vector<std::vector<double>> grad;  // dim components of grad phi_R
  std::vector<double> hess;  // row-major Hessian comps: 1D {xx}; 2D {xx,xy,yy}
  std::vector<double> phi_rr;   // radial phi_R''
  std::vector<double> lap;      // Lap phi_R
  std::vector<double> bilap;    // Lap^2 phi_R
  std::vector<double> psi1;     // 1 - phi_R''
  std::vector<double> psi2;     // N - Lap phi_R
  Grid fine_grid;               // 2x points per dimension
  std::vector<cplx> lap_fine_hat;  // forward FFT of Lap phi_R on fine_grid
};

// Throws construction_error when 10R does not fit in the box.
CutoffFields eval_on_grid(const RescaledCutoff& c, const Grid& grid);

struct PsiMarginReport {
  double min_margin;
  double arg_min;
  double eta;
  double c_eta;  // eta/(N+2s)
};

// min over a dense r-grid of psi1 - c(eta) psi2^{N/(2s)}; negative margin is
// a valid report (eta too large). Checked at R = 1 and R = 4 (scale
// invariance makes one R sufficient; the second is a consistency check).
PsiMarginReport verify_psi_inequality(const RescaledCutoff& c, double eta,
                                      double s, int N);

// Largest eta with nonnegative margin (bisection to 1e-3 relative), minus a
// 10% safety factor. Throws convergence_error if none above 1e-8.
double find_eta(const CutoffProfile& profile, double s, int N);

// (r, g, g', phi, phi'', psi1, psi2, margin) rows for plotting.
std::string profile_csv(const CutoffProfile& p, double eta, double s, int N,
                        int samples = 2000);
std::string profile_json(const CutoffProfile& p);

}  // namespace fracvirial
