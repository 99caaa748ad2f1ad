#pragma once
#include "fracvirial/fracops.hpp"
#include "fracvirial/grid.hpp"

namespace fracvirial {

// Ground state Q > 0 radial solving (-Delta)^s Q + Q - Q^{2 sigma+1} = 0,
// the optimizer of the Gagliardo-Nirenberg inequality (energy-subcritical).
struct GroundState {
  FieldOnGrid profile;  // real, positive, radial
  FracParams params;
  double grad_norm_sq = 0;  // ||(-Delta)^{s/2} Q||^2
  double mass = 0;          // M[Q]
  double lp_norm = 0;       // int |Q|^{2 sigma+2}
  double energy = 0;        // E[Q]
  double residual = 0;      // sup-norm of the equation residual
  double gamma_final = 0;   // Petviashvili stabilization factor at exit
  int iterations = 0;
};

struct Thresholds {
  double c_gn = 0;     // best Gagliardo-Nirenberg constant from Q
  double k_const = 0;  // K = (2s(sigma+1)/(sigma N C))^{s/(2 sigma)}
  double k_norms = 0;  // ||(-Delta)^{s/2}Q||^{s_c} ||Q||^{s-s_c}
  double k_energy_mass = 0;  // (s_c/N)^{-s_c/2} E[Q]^{s_c/2} M[Q]^{(s-s_c)/2}
  double y_max = 0;
  double f_at_max = 0;
  double mass_ref = 0;  // M[u0] entering F
};

enum class CriterionCase {
  NegativeEnergy,
  AboveThreshold,
  L2CriticalNegativeEnergy,
  NotSatisfied,
};

struct CriterionVerdict {
  CriterionCase kase = CriterionCase::NotSatisfied;
  // scale-invariant product conditions (both must hold for AboveThreshold)
  double lhs_energy_mass = 0, rhs_energy_mass = 0;
  double lhs_grad_mass = 0, rhs_grad_mass = 0;
};

// Reference data entering the Theorem-type criterion; finite-mass flag covers
// the energy-critical convention M[Q]^0 = 1.
struct ReferenceState {
  double energy = 0;
  double mass = 0;  // ignored when mass_finite is false
  double grad_norm = 0;
  bool mass_finite = true;
};

// Petviashvili iteration with stabilization exponent (2 sigma+1)/(2 sigma),
// started from a radial Gaussian (amplitude 1.5, width 1). Requires s_c < s;
// the solution's boundary-shell mass fraction must come out below 1e-8.
GroundState solve_ground_state(const FracParams& p, const Grid& grid,
                               double tol, int max_iter = 2000);

// r1 = grad^2 + mass - lp ;  r2 = (2s-N)/2 grad^2 - N/2 mass + N/(2s+2) lp
std::pair<double, double> pohozaev_residuals(const GroundState& q);

// C = lp / ( grad^{sigma N/s} ||Q||^{2 sigma+2-sigma N/s} )
double gn_constant(const GroundState& q);

// K three ways; throws convergence_error if the spread exceeds 1e-4 relative.
Thresholds k_constant(const FracParams& p, double c_gn, const GroundState& q);

// F(y) = y^2/2 - C/(2 sigma+2) mass0^{(sigma/s)(s-s_c)} y^{sigma N/s}
double threshold_function(double y, double mass0, const Thresholds& t,
                          const FracParams& p);
// y_max = K^{1/s_c} mass0^{-(s-s_c)/(2 s_c)}, f_max = (s_c/N) y_max^2
std::pair<double, double> critical_point(const Thresholds& t,
                                         const FracParams& p, double mass0);

ReferenceState reference_from_ground_state(const GroundState& q);

CriterionVerdict check_blowup_criterion(const FieldOnGrid& u0,
                                        const FracParams& p,
                                        const ReferenceState& ref);

// Energy-critical branch: closed-form Sobolev optimizer
// Q(x) = lambda (mu^2 + |x-a|^2)^{-(N-2s)/2}, requires N > 2s.
FieldOnGrid sobolev_optimizer(double lambda, double mu,
                              const std::vector<double>& a, const Grid& grid,
                              const FracParams& p);

struct SobolevReport {
  double seminorm_sq_fourier = 0;  // Hankel/Bessel quadrature route
  double seminorm_sq_pairing = 0;  // closed-form pairing route
  double lp_closed = 0;            // int |Q|^{2 sigma*+2}, closed form
  double lp_grid = 0;              // ball sum on the grid + analytic tail
  double identity_residual = 0;    // |seminorm^2 - lp| / lp
  double route_residual = 0;       // |fourier - pairing| / pairing
  double grid_residual = 0;        // |lp_grid - lp_closed| / lp_closed
  double k_sob = 0;                // ||(-Delta)^{s/2}Q||^s for normalized Q
  double k_from_energy = 0;        // (s/N)^{-s/2} E[Q]^{s/2}
  double energy = 0;
  bool mass_finite = false;  // N > 4s
  double tail_exponent = 0;  // fitted decay, should approach N-2s
  double normalized_lambda = 0;  // lambda making Q solve the Euler equation
};

SobolevReport sobolev_checks(double lambda, double mu, const FracParams& p,
                             const Grid& grid);

ReferenceState reference_from_sobolev(const SobolevReport& rep,
                                      const FracParams& p);

// amplitude factor lam on top of `shape` such that E[lam * shape] = 0,
// bracketed to 1e-6; callers scale past it to reach negative energy.
double zero_energy_amplitude(const FieldOnGrid& shape, const FracParams& p);

}  // namespace fracvirial
