#pragma once
#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fracvirial/errors.hpp"
#include "fracvirial/grid.hpp"

namespace fracvirial {

// Bounded interval (a,b) containing 0 (star-shaped about the origin),
// uniform nodes x_i = a + i h, i = 1..M-1 interior; u = 0 outside.
struct IntervalDomain {
  double a = -1.0;
  double b = 1.0;
  int points = 512;  // M; spacing h = (b-a)/M

  IntervalDomain() = default;
  IntervalDomain(double a_, double b_, int points_);
  double h() const { return (b - a) / points; }
  int interior() const { return points - 1; }
  double node(int i) const { return a + i * h(); }  // i in 1..M-1
};

// Dense symmetric discretization of (-Delta)^s with the exterior Dirichlet
// condition: second-difference quadrature of the Riesz kernel
// c_{1,s} |x-y|^{-1-2s} with piecewise-linear interpolation between nodes,
// a quadratic model on the singular cell, and the exact analytic tail over
// the region where both references are exterior.
struct DirichletFracOperator {
  IntervalDomain domain;
  double s = 0.5;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;   // nondecreasing, all positive
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

double riesz_constant_1d(double s);

DirichletFracOperator assemble(const IntervalDomain& dom, double s);

struct DomainState {
  IntervalDomain domain;
  Eigen::VectorXcd values;  // interior nodes; zero outside by convention

  DomainState() = default;
  explicit DomainState(const IntervalDomain& d)
      : domain(d), values(Eigen::VectorXcd::Zero(d.interior())) {}
};

double domain_mass(const DomainState& u);
// quadratic form <u, L u> (real)
double domain_form(const DomainState& u, const DirichletFracOperator& op);
double domain_energy(const DomainState& u, const DirichletFracOperator& op,
                     double sigma);
// M_Omega[u] = 2 Im int conj(u) x du/dx dx, centered differences with the
// zero exterior extension
double virial_omega(const DomainState& u);

struct DomainSnapshot {
  double time = 0, energy = 0, mass = 0, form = 0, virial = 0, max_amp = 0,
         dt = 0;
};

struct DomainRunLog {
  std::vector<DomainSnapshot> snaps;
  bool blowup_flag = false;
  double blowup_time = 0;
  bool instability_flag = false;
  std::string abort_reason;
  double initial_energy = 0, initial_mass = 0, initial_form = 0;
  double energy_drift_per_time = 0, mass_drift_per_time = 0;
  long long steps = 0;
};

struct DomainEvolveConfig {
  double dt = 1e-4;
  double t_max = 1.0;
  int snapshot_stride = 10;
  double coupling = 1.0;
  double blowup_form_factor = 2500.0;  // form ~ grad^2: flag at 50^2 x
  double max_phase_per_step = 0.1;
  double conservation_tol = 1e-8;
};

// Strang splitting; the linear substep rotates eigenbasis coefficients by
// e^{-i dt lambda_k} exactly.
DomainRunLog evolve_domain(const DomainState& u0,
                           const DirichletFracOperator& op, double sigma,
                           const DomainEvolveConfig& cfg);

struct PohozaevReport {
  double lhs = 0;    // Re int (x du/dx) (L conj(u)) dx
  double rhs = 0;    // (2s-N)/2 int u L conj(u) dx
  double slack = 0;  // rhs - lhs, nonnegative up to discretization
  double tol_disc = 0;  // 10 h^{min(2s,1)} <u,Lu>
};

PohozaevReport pohozaev_estimate_check(const DomainState& u,
                                       const DirichletFracOperator& op);

struct DomainMonotonicityReport {
  int checked = 0;
  double fraction_ok = 0;
  double max_needed_slack = 0;
  double slack_allowance = 0;
  double min_form = 0;
  bool virial_decreasing = false;
};

// FD(dM_Omega/dt) <= 4 sigma N E_0 - 2(sigma N - 2s) <u,Lu> + slack
DomainMonotonicityReport monotonicity_omega(const DomainRunLog& log, double s,
                                            double sigma,
                                            double slack_frac = 0.05);

// smooth random interior bump, mesh-independent family (for slack ensembles)
DomainState random_domain_bump(const IntervalDomain& dom, std::uint64_t seed);

double zero_energy_amplitude_domain(const DomainState& shape,
                                    const DirichletFracOperator& op,
                                    double sigma);

std::string domain_log_csv(const DomainRunLog& log);
std::string eigenvalues_csv(const DirichletFracOperator& op, int count);

}  // namespace fracvirial
