#pragma once
#include "fracvirial/cutoff.hpp"
#include "fracvirial/fracops.hpp"
#include "fracvirial/grid.hpp"

namespace fracvirial {

// d/dt M_phi[u] for a solution of the focusing fractional NLS splits into
//   4 int_0^inf m^s int  conj(grad u_m) . Hess(phi) . grad u_m dx dm
// - int_0^inf m^s int (Lap^2 phi) |u_m|^2 dx dm
// - 2 sigma/(sigma+1) int (Lap phi) |u|^{2 sigma+2} dx,
// with u_m = c_s (-Delta+m)^{-1} u. The reports below carry the three terms
// plus the decompositions used by the localized radial estimates.
struct VirialReport {
  double m_phi = 0;
  double hessian_term = 0;
  double biharmonic_term = 0;
  double nonlinear_term = 0;
  double rhs_total = 0;
  double energy = 0;
  double grad_norm_sq = 0;
  double full_rhs = 0;  // 4 sigma N E - 2(sigma N - 2s) grad_norm_sq
  double quadrature_residual = 0;
};

struct EstimateDecomposition {
  double core_identity = 0;        // 4 sigma N E - 2(sigma N - 2s) grad^2
  double localization_defect = 0;  // 4 int int m^s psi1 |grad u_m|^2 (>= 0)
  double biharmonic_term = 0;
  double tail_nonlinear = 0;  // -(2s/(s+1)) int_{|x|>=R} (Lap phi - N)|u|^{..}
  double rhs_total = 0;
  double identity_residual = 0;  // rhs - (core - defect + biharm + tail)
  double strauss_tail_scale = 0;  // R^{-sigma(N-1)+eps s} grad^{sigma/s+eps}
  double eps = 0;
  // refined (L2-critical) quantities
  double psi1_integral = 0;      // same as localization_defect / 4
  double psi2_pow_integral = 0;  // int int m^s psi2^{N/2s} |grad u_m|^2
  double psi2_nl_integral = 0;   // int psi2 |u|^{2 sigma+2} dx
  double eta = 0;
  double c_eta = 0;
  double certified_combo = 0;  // 4 int int m^s (psi1 - c psi2^{N/2s})|grad u_m|^2
  double substitution_error = 0;
  double bound_slack = 0;  // rhs_total - 8 s E
};

enum class HessianPath { General, Radial };

// M_phi[u] = 2 Im int conj(u) grad(phi_R) . grad(u) dx (spectral gradient)
double localized_virial(const FieldOnGrid& u, const CutoffFields& cf);
double localized_virial(const FieldOnGrid& u, const RescaledCutoff& c);

// Exact instantaneous value of d/dt M_phi for a solution at state u.
VirialReport virial_rhs_general(const FieldOnGrid& u, const CutoffFields& cf,
                                const FracParams& p, const MQuadrature& q,
                                HessianPath path = HessianPath::General);

// 4 sigma N E - 2 (sigma N - 2s) ||(-Delta)^{s/2} u||^2
double full_virial_rhs(const FieldOnGrid& u, const FracParams& p,
                       double energy_value);

// Lemma-2.2-style exact decomposition; 0 < eps < (2s-1) sigma / s.
EstimateDecomposition radial_estimate_decomposition(const FieldOnGrid& u,
                                                    const CutoffFields& cf,
                                                    const FracParams& p,
                                                    const MQuadrature& q,
                                                    double eps);

// Refined decomposition at sigma = 2s/N with the cutoff margin certificate.
EstimateDecomposition refined_decomposition(const FieldOnGrid& u,
                                            const CutoffFields& cf,
                                            const FracParams& p,
                                            const MQuadrature& q, double eta);

// sup_{x != 0} |x|^{N/2-alpha} |u(x)| / ||(-Delta)^{alpha/2} u||, radial u.
double strauss_ratio(const FieldOnGrid& u, double alpha);
bool is_approximately_radial(const FieldOnGrid& u, double tol = 1e-8);

struct BoundReport {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};

// |M_phi[u]| against ||u||_{H^{1/2}}-type control.
BoundReport virial_bound_a1(const FieldOnGrid& u, const CutoffFields& cf);

// | int int m^s (Lap^2 phi_R) |u_m|^2 | against
// ||Lap^2 phi_R||_inf^s ||Lap phi_R||_inf^{1-s} ||u||^2.
BoundReport biharmonic_bound_a2(const FieldOnGrid& u, const RescaledCutoff& c,
                                const Grid& grid, double s,
                                const MQuadrature& q);

// int_0^inf m^s int (Lap^2 phi_R) |u_m|^2 dx dm alone. `exact` selects the
// alias-free integrated-by-parts pairing; monitors use the cheap sampled
// route, whose percent-level error is irrelevant against slack checks.
double biharmonic_integral(const FieldOnGrid& u, const CutoffFields& cf,
                           double s, const MQuadrature& q, bool exact = true);

// -(2 sigma/(sigma+1)) int (Lap phi_R - N) |u|^{2 sigma+2} dx
double tail_nonlinear_term(const FieldOnGrid& u, const CutoffFields& cf,
                           const FracParams& p);

}  // namespace fracvirial
