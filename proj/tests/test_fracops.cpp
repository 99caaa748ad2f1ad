#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "fracvirial/fft.hpp"
#include "fracvirial/fracops.hpp"
#include "fracvirial/grid.hpp"

using namespace fracvirial;

namespace {
double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double rel_l2_diff(const FieldOnGrid& a, const FieldOnGrid& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}
}  // namespace

TEST_CASE("grid invariants") {
  Grid g(1, 8.0, 64);
  CHECK(g.spacing() * g.points_per_dim == doctest::Approx(2 * g.half_length));
  CHECK(g.mode(0) == 0);
  CHECK(g.mode(32) == -32);
  CHECK(g.mode(63) == -1);
  CHECK(g.wavenumber(1) == doctest::Approx(M_PI / 8.0));
  CHECK_THROWS_AS(Grid(3, 1.0, 8), invalid_input);
  CHECK_THROWS_AS(Grid(1, 1.0, 48), invalid_input);
}

TEST_CASE("fft round trip and Parseval") {
  Grid g(2, M_PI, 32);
  FieldOnGrid u = random_band_limited(g, 8, 42);
  FieldOnGrid v = inverse_fft_copy(forward_fft_copy(u));
  CHECK(rel_l2_diff(v, u) < 1e-13);
  FieldOnGrid uhat = forward_fft_copy(u);
  double sum_phys = 0.0, sum_spec = 0.0;
  for (auto& z : u.values) sum_phys += std::norm(z);
  for (auto& z : uhat.values) sum_spec += std::norm(z);
  CHECK(rel_err(sum_spec / u.size(), sum_phys) < 1e-13);
}

TEST_CASE("balakrishnan scalar identity (exp scheme)") {
  MQuadrature q;
  CHECK(balakrishnan_scalar(1.0, 0.3, q) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(balakrishnan_scalar(2.0, 0.5, q) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(balakrishnan_scalar(10.0, 0.8, q) ==
        doctest::Approx(std::pow(10.0, 0.8)).epsilon(1e-9));
  for (double s : {0.1, 0.55, 0.6, 0.75, 0.9, 0.95})
    for (double x : {0.5, 1.0, 2.0, 10.0, 345.6})
      CHECK(rel_err(balakrishnan_scalar(x, s, q), std::pow(x, s)) < 1e-9);
  CHECK_THROWS_AS(balakrishnan_scalar(-1.0, 0.5, q), invalid_input);
}

TEST_CASE("balakrishnan scalar identity (tangent scheme)") {
  MQuadrature q;
  q.scheme = MScheme::TangentSubstitution;
  q.panels = 48;
  q.rel_tol = 1e-7;
  validate_scalar_identity(q, 0.6);
  CHECK(rel_err(balakrishnan_scalar(2.0, 0.5, q), std::sqrt(2.0)) < 1e-6);
}

TEST_CASE("plancherel scalar weight closed form") {
  MQuadrature q;
  // s |xi|^{2s-2} at |xi|=2, s=0.5 equals exactly 1/4
  CHECK(plancherel_weight(4.0, 0.5, q) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(plancherel_weight(9.0, 0.7, q) ==
        doctest::Approx(0.7 * std::pow(9.0, -0.3)).epsilon(1e-9));
}

TEST_CASE("frac_laplacian on plane waves and constants") {
  Grid g(2, M_PI, 64);
  FieldOnGrid u = plane_wave(g, {3, 4});
  FieldOnGrid lu = frac_laplacian(u, 0.5);  // multiplier |k|^{2s} = |k| = 5
  FieldOnGrid want = u;
  for (auto& z : want.values) z *= 5.0;
  CHECK(rel_l2_diff(lu, want) < 1e-12);

  FieldOnGrid zero(g);
  CHECK(sup_norm(frac_laplacian(zero, 0.75)) == 0.0);

  FieldOnGrid c(g);
  for (auto& z : c.values) z = 2.7;
  CHECK(sup_norm(frac_laplacian(c, 0.9)) < 1e-12);
  CHECK(frac_seminorm(c, 0.9) < 1e-12);

  FieldOnGrid bad(g);
  bad.values[5] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(frac_laplacian(bad, 0.5), invalid_input);
}

TEST_CASE("frac_seminorm plane wave and s=0") {
  Grid g(2, M_PI, 32);
  FieldOnGrid u = plane_wave(g, {2, 0});
  double V = g.box_volume();
  CHECK(rel_err(frac_seminorm(u, 0.8), std::sqrt(V * std::pow(2.0, 1.6))) <
        1e-12);
  CHECK(rel_err(frac_seminorm(u, 0.0), l2_norm(u)) < 1e-13);
}

TEST_CASE("self-adjointness and composition") {
  Grid g(2, 4.0, 32);
  FieldOnGrid u = random_band_limited(g, 8, 7);
  FieldOnGrid v = random_band_limited(g, 8, 8);
  double s = 0.7;
  cplx a = inner_product(u, frac_laplacian(v, s));
  cplx b = inner_product(frac_laplacian(u, s), v);
  CHECK(std::abs(a - b) / std::abs(a) < 1e-12);

  FieldOnGrid c1 = frac_laplacian(frac_laplacian(u, 0.4), 0.35);
  FieldOnGrid c2 = frac_laplacian(u, 0.75);
  CHECK(rel_l2_diff(c1, c2) < 1e-12);
}

TEST_CASE("balakrishnan_apply: plane wave, zero, gaussian vs multiplier") {
  MQuadrature q;
  Grid g(1, 20.0, 1024);
  FieldOnGrid zero(g);
  CHECK(sup_norm(balakrishnan_apply(zero, 0.6, q)) < 1e-14);

  FieldOnGrid w = plane_wave(g, {5});
  double kk = std::pow(M_PI / 20.0 * 5, 2.0);
  FieldOnGrid lw = balakrishnan_apply(w, 0.6, q);
  FieldOnGrid want = w;
  for (auto& z : want.values) z *= std::pow(kk, 0.6);
  CHECK(rel_l2_diff(lw, want) < 1e-8);

  FieldOnGrid u = gaussian_field(g, 1.0, 1.0);
  FieldOnGrid b = balakrishnan_apply(u, 0.6, q);
  FieldOnGrid m = frac_laplacian(u, 0.6);
  CHECK(rel_l2_diff(b, m) < 1e-6);
}

TEST_CASE("multiplier/quadrature equivalence across s (module invariant)") {
  MQuadrature q;
  Grid g(2, 8.0, 64);
  for (double s : {0.55, 0.6, 0.75, 0.9}) {
    FieldOnGrid u = random_band_limited(g, 16, 1000 + int(100 * s));
    FieldOnGrid b = balakrishnan_apply(u, s, q);
    FieldOnGrid m = frac_laplacian(u, s);
    CHECK(rel_l2_diff(b, m) < 1e-6);
  }
}

TEST_CASE("gaussian fractional laplacian: 2D multiplier vs quadrature tight") {
  MQuadrature q;
  Grid g(2, 10.0, 128);
  FieldOnGrid u = gaussian_field(g, 1.0, 1.0);
  FieldOnGrid b = balakrishnan_apply(u, 0.75, q);
  FieldOnGrid m = frac_laplacian(u, 0.75);
  CHECK(rel_l2_diff(b, m) < 1e-6);
}

TEST_CASE("resolvent field: plane wave, decay bound, dense-matrix oracle") {
  Grid g(1, M_PI, 64);
  double s = 0.5;
  double cs = resolvent_normalization(s);
  CHECK(cs == doctest::Approx(0.564190).epsilon(1e-5));

  FieldOnGrid w = plane_wave(g, {2});  // |k|^2 = 4
  FieldOnGrid r = resolvent_field(w, 1.0, s);
  FieldOnGrid want = w;
  for (auto& z : want.values) z *= cs / 5.0;
  CHECK(rel_l2_diff(r, want) < 1e-13);

  // m -> infinity multiplier bound ||u_m|| <= c_s ||u|| / m
  FieldOnGrid u = random_band_limited(g, 16, 3);
  for (double m : {1e3, 1e6})
    CHECK(l2_norm(resolvent_field(u, m, s)) <= cs * l2_norm(u) / m * (1 + 1e-12));

  CHECK_THROWS_AS(resolvent_field(u, -1.0, s), invalid_input);

  // dense-matrix oracle on a tiny grid: build (-Delta + m) from the explicit
  // DFT matrix by naive summation and solve directly.
  Grid tiny(1, 4.0, 64);
  FieldOnGrid ug = gaussian_field(tiny, 1.0, 1.0);
  double m = 2.0;
  const int M = tiny.points_per_dim;
  std::vector<cplx> A(static_cast<std::size_t>(M) * M, cplx(0.0));
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      cplx acc = 0.0;
      for (int k = 0; k < M; ++k) {
        double xi = tiny.wavenumber(k);
        double phase = 2.0 * M_PI / M * k * (a - b);
        acc += (xi * xi + m) * std::polar(1.0 / M, phase);
      }
      A[static_cast<std::size_t>(a) * M + b] = acc;
    }
  // Gaussian elimination (partial pivot) for A z = u
  std::vector<cplx> rhs(ug.values);
  for (int col = 0; col < M; ++col) {
    int piv = col;
    for (int r2 = col + 1; r2 < M; ++r2)
      if (std::abs(A[static_cast<std::size_t>(r2) * M + col]) >
          std::abs(A[static_cast<std::size_t>(piv) * M + col]))
        piv = r2;
    if (piv != col) {
      for (int c2 = 0; c2 < M; ++c2)
        std::swap(A[static_cast<std::size_t>(col) * M + c2],
                  A[static_cast<std::size_t>(piv) * M + c2]);
      std::swap(rhs[col], rhs[piv]);
    }
    cplx d = A[static_cast<std::size_t>(col) * M + col];
    for (int r2 = col + 1; r2 < M; ++r2) {
      cplx f = A[static_cast<std::size_t>(r2) * M + col] / d;
      for (int c2 = col; c2 < M; ++c2)
        A[static_cast<std::size_t>(r2) * M + c2] -=
            f * A[static_cast<std::size_t>(col) * M + c2];
      rhs[r2] -= f * rhs[col];
    }
  }
  std::vector<cplx> z(M);
  for (int r2 = M - 1; r2 >= 0; --r2) {
    cplx acc = rhs[r2];
    for (int c2 = r2 + 1; c2 < M; ++c2)
      acc -= A[static_cast<std::size_t>(r2) * M + c2] * z[c2];
    z[r2] = acc / A[static_cast<std::size_t>(r2) * M + r2];
  }
  FieldOnGrid oracle(tiny);
  for (int i = 0; i < M; ++i) oracle.values[i] = cs * z[i];
  FieldOnGrid ours = resolvent_field(ug, m, s);
  CHECK(rel_l2_diff(ours, oracle) < 1e-10);
}

TEST_CASE("weighted gradient integral: zero field and Plancherel identity") {
  MQuadrature q;
  Grid g(1, 10.0, 512);
  FieldOnGrid zero(g);
  CHECK(weighted_gradient_integral(zero, 0.5, q) == doctest::Approx(0.0));

  for (double s : {0.55, 0.7, 0.9}) {
    FieldOnGrid u = random_band_limited(g, 40, 17);
    double wgi = weighted_gradient_integral(u, s, q);
    double sn = frac_seminorm(u, s);
    CHECK(rel_err(wgi, s * sn * sn) < 1e-6);
  }
}

TEST_CASE("plancherel identity on 2D random band-limited fields") {
  MQuadrature q;
  Grid g(2, 8.0, 64);
  FieldOnGrid u = random_band_limited(g, 12, 99);
  double s = 0.7;
  double wgi = weighted_gradient_integral(u, s, q);
  double sn = frac_seminorm(u, s);
  CHECK(rel_err(wgi, s * sn * sn) < 1e-6);
}

TEST_CASE("interpolation inequality |nabla|^{1/2} vs (-Delta)^{s/2}") {
  // ||u||_{H^{1/2}} <= ||(-Delta)^{s/2}u||^{1/(2s)} ||u||^{1-1/(2s)}, s>1/2
  Grid g(1, 10.0, 256);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    FieldOnGrid u = random_band_limited(g, 30, rng());
    double s = 0.8;
    double lhs = frac_seminorm(u, 0.5);
    double rhs = std::pow(frac_seminorm(u, s), 1.0 / (2 * s)) *
                 std::pow(l2_norm(u), 1.0 - 1.0 / (2 * s));
    CHECK(lhs <= rhs * (1.0 + 1e-12));
  }
}

TEST_CASE("energy arithmetic") {
  FracParams p(0.8, 1.0, 2);
  CHECK(p.s_c() == doctest::Approx(0.2));
  CHECK(p.delta() == doctest::Approx(0.4));
  p.validate_radial_regime();
  CHECK_THROWS_AS(FracParams(1.2, 1.0, 2), invalid_input);
  FracParams bad(0.8, 0.3, 2);  // s_c < 0
  CHECK_THROWS_AS(bad.validate_radial_regime(), invalid_input);

  Grid g(2, 8.0, 64);
  FieldOnGrid u = gaussian_field(g, 1.0, 1.5);
  double grad = frac_seminorm(u, 0.8);
  double e = energy(u, p);
  CHECK(rel_err(e, 0.5 * grad * grad - 0.25 * lp_integral(u, 4.0)) < 1e-12);
}

TEST_CASE("boundary mass monitor") {
  Grid g(1, 10.0, 256);
  FieldOnGrid u = gaussian_field(g, 1.0, 1.0);
  CHECK(boundary_mass_fraction(u) < 1e-8);
  FieldOnGrid edge = gaussian_field(g, 1.0, 1.0, {9.8});
  CHECK(boundary_mass_fraction(edge) > 0.1);
}
