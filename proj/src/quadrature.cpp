#include "fracvirial/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "fracvirial/fracops.hpp"

namespace fracvirial {

namespace {

std::mutex gl_mutex;
std::map<int, std::pair<std::vector<double>, std::vector<double>>> gl_cache;

// Newton iteration on Legendre polynomials; standard construction.
void build_gl(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

const std::pair<std::vector<double>, std::vector<double>>& gl_rule(int n) {
  std::lock_guard<std::mutex> lock(gl_mutex);
  auto it = gl_cache.find(n);
  if (it == gl_cache.end()) {
    std::pair<std::vector<double>, std::vector<double>> rule;
    build_gl(n, rule.first, rule.second);
    it = gl_cache.emplace(n, std::move(rule)).first;
  }
  return it->second;
}

}  // namespace

const std::vector<double>& gl_nodes(int n) { return gl_rule(n).first; }
const std::vector<double>& gl_weights(int n) { return gl_rule(n).second; }

double composite_gl(const std::function<double(double)>& f, double a, double b,
                    int panels, int nodes_per_panel) {
  const auto& xs = gl_nodes(nodes_per_panel);
  const auto& ws = gl_weights(nodes_per_panel);
  const double dw = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * dw;
    double mid = lo + 0.5 * dw, half = 0.5 * dw;
    double acc = 0.0;
    for (int i = 0; i < nodes_per_panel; ++i)
      acc += ws[i] * f(mid + half * xs[i]);
    total += half * acc;
  }
  return total;
}

double adaptive_gl(const std::function<double(double)>& f, double a, double b,
                   int panels0, int nodes_per_panel, double abs_tol,
                   double rel_tol, int max_doublings) {
  double prev = composite_gl(f, a, b, panels0, nodes_per_panel);
  for (int d = 1; d <= max_doublings; ++d) {
    int panels = panels0 << d;
    double cur = composite_gl(f, a, b, panels, nodes_per_panel);
    double resid = std::abs(cur - prev);
    if (resid <= rel_tol * std::abs(cur) + abs_tol) return cur;
    prev = cur;
  }
  double final_resid = std::abs(
      composite_gl(f, a, b, panels0 << max_doublings, nodes_per_panel) - prev);
  throw quadrature_error("adaptive_gl: no convergence at requested tolerance",
                         final_resid);
}

std::vector<MQuadrature::Node> MQuadrature::nodes(double t0, double t1,
                                                  int scale) const {
  std::vector<Node> out;
  if (scheme == MScheme::ExpSubstitution) {
    // int_0^inf F(m) dm = int F(e^t) e^t dt over [t0,t1]
    int np = panels * scale;
    // keep panel width <= ~1.3 so GL resolves the analytic integrand
    int need = static_cast<int>(std::ceil((t1 - t0) / 1.3));
    np = std::max(np, need);
    const auto& xs = gl_nodes(nodes_per_panel);
    const auto& ws = gl_weights(nodes_per_panel);
    double dw = (t1 - t0) / np;
    out.reserve(static_cast<std::size_t>(np) * nodes_per_panel);
    for (int p = 0; p < np; ++p) {
      double mid = t0 + (p + 0.5) * dw, half = 0.5 * dw;
      for (int i = 0; i < nodes_per_panel; ++i) {
        double t = mid + half * xs[i];
        double m = std::exp(t);
        out.push_back({m, half * ws[i] * m});
      }
    }
  } else {
    // m = tan(theta), dm = (1 + m^2) dtheta on (0, pi/2); both endpoints are
    // algebraic singularities (theta^{s-1} at 0, (pi/2-theta)^{-s} at pi/2),
    // so panels are graded geometrically toward each end.
    int np = panels * scale;
    if (np % 2) ++np;
    const auto& xs = gl_nodes(nodes_per_panel);
    const auto& ws = gl_weights(nodes_per_panel);
    std::vector<double> edges(np + 1);
    const double lo = MQuadrature::kTanEps, mid = M_PI / 4.0;
    const int half = np / 2;
    for (int p = 0; p <= half; ++p)
      edges[p] = lo * std::pow(mid / lo, static_cast<double>(p) / half);
    for (int p = half + 1; p <= np; ++p)
      edges[p] = M_PI / 2.0 -
                 lo * std::pow(mid / lo, static_cast<double>(np - p) / half);
    for (int p = 0; p < np; ++p) {
      double mid = 0.5 * (edges[p] + edges[p + 1]);
      double half = 0.5 * (edges[p + 1] - edges[p]);
      for (int i = 0; i < nodes_per_panel; ++i) {
        double th = mid + half * xs[i];
        double m = std::tan(th);
        out.push_back({m, half * ws[i] * (1.0 + m * m)});
      }
    }
  }
  return out;
}

void validate_scalar_identity(const MQuadrature& q, double s,
                              const std::vector<double>& xs) {
  for (double x : xs) {
    double got = balakrishnan_scalar(x, s, q);
    double want = std::pow(x, s);
    double rel = std::abs(got - want) / want;
    if (rel > 10.0 * q.rel_tol)
      throw quadrature_error(
          "scalar Balakrishnan identity failed at x=" + std::to_string(x), rel);
  }
}

}  // namespace fracvirial
