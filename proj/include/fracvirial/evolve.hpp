#pragma once
#include <string>

#include "fracvirial/cutoff.hpp"
#include "fracvirial/fracops.hpp"
#include "fracvirial/grid.hpp"
#include "fracvirial/virial.hpp"

namespace fracvirial {

struct EvolveConfig {
  double dt = 1e-4;
  double t_max = 1.0;
  double dealias_fraction = 2.0 / 3.0;
  double blowup_grad_factor = 50.0;  // flag at grad > factor * initial
  double band_fraction_flag = 0.10;  // flag when the outer band fills up
  std::vector<double> r_list;
  double eta = 0.0;
  double eps = 0.1;
  int snapshot_stride = 10;
  double coupling = 1.0;  // 0 switches the nonlinearity off
  int rhs_every = 0;      // evaluate the virial rhs every k-th snapshot
  bool monitor_error_terms = false;  // biharmonic + nonlinear tail per R
  double max_phase_per_step = 0.1;   // radians; dt halving trigger
  double leak_abort = 1e-6;
  double conservation_tol = 1e-8;  // relative drift per unit time
  std::uint64_t seed = 0;
  MQuadrature quad;  // for rhs snapshots
  // coarse policy for the error-term monitors (slack checks only)
  MQuadrature monitor_quad{MScheme::ExpSubstitution, 10, 8, 1e-8, 1e-4};
};

struct Snapshot {
  double time = 0, energy = 0, mass = 0, grad_norm = 0;
  double boundary_mass = 0, band_fraction = 0, max_amp = 0, dt = 0;
  std::vector<double> m_r;        // localized virial per R
  std::vector<double> rhs;        // Lemma-type rhs per R (NaN if skipped)
  std::vector<double> err_terms;  // |biharmonic| + |nonlinear tail| per R
};

struct CollapseFit {
  double c = 0;
  double t_star = 0;
  double rms_log_residual = 0;
  double final_decade_residual = 0;  // relative RMS over the last decade
  int points = 0;
};

struct RunLog {
  std::vector<Snapshot> snaps;
  std::vector<double> r_list;
  bool blowup_flag = false;
  double blowup_time = 0;
  bool instability_flag = false;
  std::string abort_reason;
  double initial_energy = 0, initial_mass = 0, initial_grad = 0;
  double energy_drift_per_time = 0, mass_drift_per_time = 0;
  long long steps = 0;
};

// Exact nonlinear phase, spectral linear flow, 2/3-mask after the spectral
// substep. |u| is invariant under the nonlinear phase, so that substep is
// exact; only the splitting itself introduces error.
FieldOnGrid step_strang(const FieldOnGrid& u, double dt, const FracParams& p,
                        double dealias_fraction = 2.0 / 3.0,
                        double coupling = 1.0);

FieldOnGrid dealias(const FieldOnGrid& u, double fraction = 2.0 / 3.0);
// Fraction of the |xi|^{2s}-weighted spectral mass sitting in the outer
// third of the kept band: the energy share of the dealias band.
double outer_band_fraction(const FieldOnGrid& u, double dealias_fraction,
                           double s);

RunLog run(const FieldOnGrid& u0, const EvolveConfig& cfg, const FracParams& p);

// First snapshot where grad exceeds the threshold or the resolved band is
// left; usable on synthetic logs.
std::pair<bool, double> detect_blowup(const RunLog& log,
                                      const EvolveConfig& cfg);

// Least-squares fit of m(t) = -C (t*-t)^{1-2s} on the negative decreasing
// tail of the series (exponent fixed). Throws convergence_error when the
// tail is unusable.
CollapseFit fit_collapse(const std::vector<double>& times,
                         const std::vector<double>& m_series, double s);

struct MonotonicityPerR {
  double R = 0;
  int checked = 0;
  double fraction_ok = 0;
  double max_needed_slack = 0;  // max (FD - core bound)_+ over the window
  bool monotone_after_transient = false;
};

struct MonotonicityReport {
  std::vector<MonotonicityPerR> per_r;
  bool critical = false;  // which inequality family was checked
  double min_grad = 0;
  double grad_floor = 0;  // sharp-constant lower bound when E < 0 (or 0)
  double slack_allowance = 0;
};

// Supercritical: FD(dM_R/dt) <= 4 sigma N E0 - 2 delta grad^2 + err_terms
//                 + slack_frac |4 sigma N E0|;
// critical:      FD(dM_R/dt) <= 4 s E0 + slack_frac |4 s E0|.
// Checked at interior snapshots inside the resolved window. gn_c (the best
// Gagliardo-Nirenberg constant) enables the positive grad floor for E0 < 0.
MonotonicityReport monotonicity_report(const RunLog& log, const FracParams& p,
                                       double slack_frac = 0.05,
                                       double gn_c = 0.0);

std::string run_log_csv(const RunLog& log);

}  // namespace fracvirial
