#pragma once
#include <functional>
#include <vector>

#include "fracvirial/errors.hpp"

namespace fracvirial {

// Gauss-Legendre nodes/weights on [-1,1], cached per n.
const std::vector<double>& gl_nodes(int n);
const std::vector<double>& gl_weights(int n);

// Composite Gauss-Legendre over [a,b] with `panels` equal panels.
double composite_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int nodes_per_panel);

// Same, with panel doubling until |I_2p - I_p| < rel_tol*|I_2p| + abs_tol.
// Throws quadrature_error carrying the achieved residual on failure.
double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   int panels0, int nodes_per_panel, double abs_tol,
                   double rel_tol, int max_doublings = 8);

enum class MScheme { ExpSubstitution, TangentSubstitution };

// Quadrature policy for the m-integrals of Balakrishnan-type representations.
// ExpSubstitution: m = e^t, composite GL on a [t0,t1] window, truncated tails
// handled analytically by the callers (Laurent / exponential series).
// TangentSubstitution: m = tan(theta) on (0, pi/2), cross-check scheme.
struct MQuadrature {
  MScheme scheme = MScheme::ExpSubstitution;
  int panels = 24;
  int nodes_per_panel = 12;
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;

  struct Node {
    double m;       // quadrature point in m
    double weight;  // includes substitution Jacobian
  };

  // Tangent-scheme endpoint truncation in theta; the integrals over the
  // clipped ends are restored analytically by the operators.
  static constexpr double kTanEps = 1e-6;

  // Nodes covering m in [exp(t0), exp(t1)] (exp scheme) or (0,inf) (tangent).
  // `scale` multiplies the panel count (used for doubling checks).
  std::vector<Node> nodes(double t0, double t1, int scale = 1) const;
};

// Validates a quadrature policy against the scalar Balakrishnan identity
// x^s = (sin pi s / pi) int_0^inf m^{s-1} x/(x+m) dm at the given x values.
// Throws quadrature_error if any relative error exceeds q.rel_tol * 10.
void validate_scalar_identity(const MQuadrature& q, double s,
                              const std::vector<double>& xs = {0.5, 1.0, 2.0,
                                                               10.0});

}  // namespace fracvirial
