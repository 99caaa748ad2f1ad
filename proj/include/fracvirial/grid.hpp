#pragma once
#include <complex>
#include <cstdint>
#include <vector>

#include "fracvirial/errors.hpp"

namespace fracvirial {

using cplx = std::complex<double>;

// Periodic uniform grid on the box [-L,L)^dim, dim in {1,2},
// points_per_dim a power of two. Wavenumbers are pi*k/L with
// k = -M/2..M/2-1 per dimension.
struct Grid {
  int dim = 1;
  double half_length = 1.0;
  int points_per_dim = 0;

  Grid() = default;
  Grid(int dim_, double half_length_, int points_per_dim_);

  double spacing() const { return 2.0 * half_length / points_per_dim; }
  std::size_t size() const {
    std::size_t n = static_cast<std::size_t>(points_per_dim);
    return dim == 1 ? n : n * n;
  }
  double cell_volume() const {
    double h = spacing();
    return dim == 1 ? h : h * h;
  }
  double box_volume() const {
    double v = 2.0 * half_length;
    return dim == 1 ? v : v * v;
  }
  double coord(int idx) const { return -half_length + idx * spacing(); }
  int mode(int idx) const {
    return idx < points_per_dim / 2 ? idx : idx - points_per_dim;
  }
  double wavenumber(int idx) const {
    return M_PI / half_length * mode(idx);
  }
  // Largest |xi| per dimension.
  double max_wavenumber() const {
    return M_PI / half_length * (points_per_dim / 2);
  }
  bool operator==(const Grid& o) const {
    return dim == o.dim && half_length == o.half_length &&
           points_per_dim == o.points_per_dim;
  }
};

// Complex state u sampled on a Grid, row-major in 2D.
struct FieldOnGrid {
  Grid grid;
  std::vector<cplx> values;

  FieldOnGrid() = default;
  explicit FieldOnGrid(const Grid& g) : grid(g), values(g.size(), cplx(0.0)) {}
  FieldOnGrid(const Grid& g, std::vector<cplx> v);

  std::size_t size() const { return values.size(); }
};

void require_finite(const FieldOnGrid& u, const char* who);

// L2 quantities use the exact torus trapezoid rule h^dim * sum.
double l2_norm_sq(const FieldOnGrid& u);
double l2_norm(const FieldOnGrid& u);
// integral of |u|^p
double lp_integral(const FieldOnGrid& u, double p);
cplx inner_product(const FieldOnGrid& a, const FieldOnGrid& b);  // <a,b> = int conj(a) b
double sup_norm(const FieldOnGrid& u);
cplx mean_value(const FieldOnGrid& u);

// Fraction of L2 mass in the outer shell |x|_inf >= 0.9 L (box-leakage monitor).
double boundary_mass_fraction(const FieldOnGrid& u);

// Field constructors used across modules and tests.
FieldOnGrid plane_wave(const Grid& g, const std::vector<int>& mode_k,
                       double amplitude = 1.0);
// amp * exp(-|x - center|^2 / width^2) * exp(i velocity.x)
FieldOnGrid gaussian_field(const Grid& g, double amplitude, double width,
                           const std::vector<double>& center = {},
                           const std::vector<double>& velocity = {});
// Random complex field supported on modes |k_j| <= band, seeded.
FieldOnGrid random_band_limited(const Grid& g, int band, std::uint64_t seed);
// Random *radial* real field: sum of radial bumps, seeded.
FieldOnGrid random_radial_field(const Grid& g, std::uint64_t seed,
                                double max_radius);

}  // namespace fracvirial
