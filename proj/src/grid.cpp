#include "fracvirial/grid.hpp"

#include <cmath>
#include <random>

#include "fracvirial/fft.hpp"

namespace fracvirial {

static bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Grid::Grid(int dim_, double half_length_, int points_per_dim_)
    : dim(dim_), half_length(half_length_), points_per_dim(points_per_dim_) {
  if (dim != 1 && dim != 2)
    throw invalid_input("Grid: dim must be 1 or 2");
  if (!(half_length > 0.0))
    throw invalid_input("Grid: half_length must be positive");
  if (!power_of_two(points_per_dim))
    throw invalid_input("Grid: points_per_dim must be a power of two");
}

FieldOnGrid::FieldOnGrid(const Grid& g, std::vector<cplx> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw invalid_input("FieldOnGrid: value count does not match grid");
}

void require_finite(const FieldOnGrid& u, const char* who) {
  for (const cplx& z : u.values)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw invalid_input(std::string(who) + ": non-finite values in input field");
}

double l2_norm_sq(const FieldOnGrid& u) {
  double s = 0.0;
  for (const cplx& z : u.values) s += std::norm(z);
  return u.grid.cell_volume() * s;
}

double l2_norm(const FieldOnGrid& u) { return std::sqrt(l2_norm_sq(u)); }

double lp_integral(const FieldOnGrid& u, double p) {
  double s = 0.0;
  for (const cplx& z : u.values) s += std::pow(std::abs(z), p);
  return u.grid.cell_volume() * s;
}

cplx inner_product(const FieldOnGrid& a, const FieldOnGrid& b) {
  if (!(a.grid == b.grid))
    throw invalid_input("inner_product: grids differ");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    s += std::conj(a.values[i]) * b.values[i];
  return a.grid.cell_volume() * s;
}

double sup_norm(const FieldOnGrid& u) {
  double m = 0.0;
  for (const cplx& z : u.values) m = std::max(m, std::abs(z));
  return m;
}

cplx mean_value(const FieldOnGrid& u) {
  cplx s = 0.0;
  for (const cplx& z : u.values) s += z;
  return s / static_cast<double>(u.values.size());
}

double boundary_mass_fraction(const FieldOnGrid& u) {
  const Grid& g = u.grid;
  const int M = g.points_per_dim;
  double shell = 0.0, total = 0.0;
  auto outer = [&](int idx) {
    return std::abs(g.coord(idx)) >= 0.9 * g.half_length;
  };
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i) {
      double w = std::norm(u.values[i]);
      total += w;
      if (outer(i)) shell += w;
    }
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double w = std::norm(u.values[static_cast<std::size_t>(i) * M + j]);
        total += w;
        if (outer(i) || outer(j)) shell += w;
      }
  }
  return total > 0.0 ? shell / total : 0.0;
}

FieldOnGrid plane_wave(const Grid& g, const std::vector<int>& mode_k,
                       double amplitude) {
  if (static_cast<int>(mode_k.size()) != g.dim)
    throw invalid_input("plane_wave: mode size must equal grid dim");
  FieldOnGrid u(g);
  const int M = g.points_per_dim;
  const double kx = M_PI / g.half_length * mode_k[0];
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i)
      u.values[i] = amplitude * std::polar(1.0, kx * g.coord(i));
  } else {
    const double ky = M_PI / g.half_length * mode_k[1];
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        u.values[static_cast<std::size_t>(i) * M + j] =
            amplitude * std::polar(1.0, kx * g.coord(i) + ky * g.coord(j));
  }
  return u;
}

FieldOnGrid gaussian_field(const Grid& g, double amplitude, double width,
                           const std::vector<double>& center,
                           const std::vector<double>& velocity) {
  FieldOnGrid u(g);
  const int M = g.points_per_dim;
  std::vector<double> c(g.dim, 0.0), v(g.dim, 0.0);
  for (std::size_t i = 0; i < center.size() && i < c.size(); ++i) c[i] = center[i];
  for (std::size_t i = 0; i < velocity.size() && i < v.size(); ++i) v[i] = velocity[i];
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i) {
      double x = g.coord(i) - c[0];
      u.values[i] = amplitude * std::exp(-x * x / (width * width)) *
                    std::polar(1.0, v[0] * g.coord(i));
    }
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double x = g.coord(i) - c[0], y = g.coord(j) - c[1];
        u.values[static_cast<std::size_t>(i) * M + j] =
            amplitude * std::exp(-(x * x + y * y) / (width * width)) *
            std::polar(1.0, v[0] * g.coord(i) + v[1] * g.coord(j));
      }
  }
  return u;
}

FieldOnGrid random_band_limited(const Grid& g, int band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FieldOnGrid uhat(g);
  const int M = g.points_per_dim;
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i)
      if (std::abs(g.mode(i)) <= band)
        uhat.values[i] = cplx(gauss(rng), gauss(rng));
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        if (std::abs(g.mode(i)) <= band && std::abs(g.mode(j)) <= band)
          uhat.values[static_cast<std::size_t>(i) * M + j] =
              cplx(gauss(rng), gauss(rng));
  }
  inverse_fft(uhat);
  return uhat;
}

FieldOnGrid random_radial_field(const Grid& g, std::uint64_t seed,
                                double max_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int nbump = 3;
  std::vector<double> amp(nbump), wid(nbump), rad(nbump);
  for (int b = 0; b < nbump; ++b) {
    amp[b] = 2.0 * uni(rng) - 1.0;
    wid[b] = 0.5 + 1.5 * uni(rng);
    rad[b] = max_radius * uni(rng);
  }
  FieldOnGrid u(g);
  const int M = g.points_per_dim;
  auto val = [&](double r) {
    double s = 0.0;
    for (int b = 0; b < nbump; ++b) {
      double d = (r - rad[b]) / wid[b];
      double dm = (r + rad[b]) / wid[b];  // even in r, smooth at 0
      s += amp[b] * (std::exp(-d * d) + std::exp(-dm * dm));
    }
    return s;
  };
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i) u.values[i] = val(std::abs(g.coord(i)));
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double r = std::hypot(g.coord(i), g.coord(j));
        u.values[static_cast<std::size_t>(i) * M + j] = val(r);
      }
  }
  return u;
}

}  // namespace fracvirial
