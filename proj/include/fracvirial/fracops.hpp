#pragma once
#include "fracvirial/grid.hpp"
#include "fracvirial/quadrature.hpp"

namespace fracvirial {

// Equation parameters: i u_t = (-Delta)^s u - |u|^{2 sigma} u on R^N.
struct FracParams {
  double s = 0.8;
  double sigma = 1.0;
  int dim = 2;

  FracParams() = default;
  FracParams(double s_, double sigma_, int dim_);

  // scaling index s_c = N/2 - s/sigma
  double s_c() const { return 0.5 * dim - s / sigma; }
  // delta = sigma N - 2 s (positive iff L2-supercritical)
  double delta() const { return sigma * dim - 2.0 * s; }
  bool l2_critical(double tol = 1e-12) const {
    return std::abs(sigma - 2.0 * s / dim) <= tol * std::max(1.0, sigma);
  }
  // Radial-blowup regime: N >= 2, s in (1/2,1), 0 <= s_c <= s, sigma < 2s.
  void validate_radial_regime() const;
};

// normalization c_s = sqrt(sin(pi s)/pi) for the resolvent family
double resolvent_normalization(double s);

// (-Delta)^s u via the Fourier multiplier |xi|^{2s}; zero mode -> 0.
// Accepts 0 < s <= 2 (covers half-powers and the biharmonic check).
FieldOnGrid frac_laplacian(const FieldOnGrid& u, double s);

// ||(-Delta)^{s/2} u||_{L2}; s = 0 reduces to the L2 norm.
double frac_seminorm(const FieldOnGrid& u, double s);

// scalar identity x^s = (sin pi s/pi) int_0^inf m^{s-1} x/(x+m) dm,
// evaluated by the requested quadrature scheme (with analytic tails).
double balakrishnan_scalar(double x, double s, const MQuadrature& q);

// (sin pi s/pi) int m^s/(x+m)^2 dm  ( = s x^{s-1} in closed form )
double plancherel_weight(double x, double s, const MQuadrature& q);

// Balakrishnan representation of (-Delta)^s u: the m-integral is evaluated
// by quadrature, each resolvent (-Delta+m)^{-1} applied spectrally.
FieldOnGrid balakrishnan_apply(const FieldOnGrid& u, double s,
                               const MQuadrature& q);

// u_m = c_s (-Delta + m)^{-1} u; zero mode -> value/m.
FieldOnGrid resolvent_field(const FieldOnGrid& u, double m, double s);

// int_0^inf m^s ||grad u_m||^2 dm by quadrature; equals s||(-Delta)^{s/2}u||^2.
double weighted_gradient_integral(const FieldOnGrid& u, double s,
                                  const MQuadrature& q);

// E[u] = 1/2 ||(-Delta)^{s/2}u||^2 - 1/(2 sigma+2) int |u|^{2 sigma+2}
double energy(const FieldOnGrid& u, const FracParams& p);
double mass(const FieldOnGrid& u);

// m-window [t0,t1] (in t = log m) for quadrature on integrands whose modes
// carry x = |xi|^2 in [x_min, x_max]; shared by the field-level integrals.
struct MWindow {
  double t0, t1;
};
MWindow apply_window(const Grid& g, double s, double rel_tol);

}  // namespace fracvirial
