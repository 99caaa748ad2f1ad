#include "fracvirial/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace fracvirial {

namespace {

struct PlanKey {
  int dim, n, sign;
  bool operator<(const PlanKey& o) const {
    if (dim != o.dim) return dim < o.dim;
    if (n != o.n) return n < o.n;
    return sign < o.sign;
  }
};

std::mutex plan_mutex;
std::map<PlanKey, fftw_plan> plan_cache;

fftw_plan get_plan(int dim, int n, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  PlanKey key{dim, n, sign};
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  // FFTW_ESTIMATE keeps planning deterministic (bit-stable reruns);
  // FFTW_UNALIGNED lets us execute on arbitrary std::vector storage.
  std::size_t total = dim == 1 ? n : static_cast<std::size_t>(n) * n;
  std::vector<cplx> scratch(total);
  auto* ptr = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan p = dim == 1
                    ? fftw_plan_dft_1d(n, ptr, ptr, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED)
                    : fftw_plan_dft_2d(n, n, ptr, ptr, sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_cache.emplace(key, p);
  return p;
}

void execute(FieldOnGrid& u, int sign) {
  fftw_plan p = get_plan(u.grid.dim, u.grid.points_per_dim, sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(u.values.data());
  fftw_execute_dft(p, ptr, ptr);
}

}  // namespace

void forward_fft(FieldOnGrid& u) { execute(u, FFTW_FORWARD); }

void inverse_fft(FieldOnGrid& u) {
  execute(u, FFTW_BACKWARD);
  double norm = 1.0 / static_cast<double>(u.size());
  for (cplx& z : u.values) z *= norm;
}

FieldOnGrid forward_fft_copy(const FieldOnGrid& u) {
  FieldOnGrid v = u;
  forward_fft(v);
  return v;
}

FieldOnGrid inverse_fft_copy(const FieldOnGrid& u) {
  FieldOnGrid v = u;
  inverse_fft(v);
  return v;
}

std::vector<FieldOnGrid> gradient_from_spectrum(const FieldOnGrid& uhat) {
  const Grid& g = uhat.grid;
  const int M = g.points_per_dim;
  std::vector<FieldOnGrid> out;
  out.reserve(g.dim);
  for (int d = 0; d < g.dim; ++d) {
    FieldOnGrid comp(g);
    if (g.dim == 1) {
      for (int i = 0; i < M; ++i)
        comp.values[i] = cplx(0.0, g.wavenumber(i)) * uhat.values[i];
    } else {
      for (int i = 0; i < M; ++i) {
        double xi_i = g.wavenumber(i);
        for (int j = 0; j < M; ++j) {
          double xi = d == 0 ? xi_i : g.wavenumber(j);
          std::size_t idx = static_cast<std::size_t>(i) * M + j;
          comp.values[idx] = cplx(0.0, xi) * uhat.values[idx];
        }
      }
    }
    inverse_fft(comp);
    out.push_back(std::move(comp));
  }
  return out;
}

FieldOnGrid pad_spectrum(const FieldOnGrid& uhat, int factor) {
  const Grid& g = uhat.grid;
  Grid fine(g.dim, g.half_length, g.points_per_dim * factor);
  FieldOnGrid out(fine);
  const int M = g.points_per_dim, MF = fine.points_per_dim;
  const double scale = std::pow(static_cast<double>(factor), g.dim);
  auto map_idx = [&](int i) { return i < M / 2 ? i : i + (MF - M); };
  if (g.dim == 1) {
    for (int i = 0; i < M; ++i)
      out.values[map_idx(i)] = scale * uhat.values[i];
  } else {
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j)
        out.values[static_cast<std::size_t>(map_idx(i)) * MF + map_idx(j)] =
            scale * uhat.values[static_cast<std::size_t>(i) * M + j];
  }
  return out;
}

double xi_sq_at(const Grid& g, std::size_t flat) {
  const int M = g.points_per_dim;
  if (g.dim == 1) {
    double k = g.wavenumber(static_cast<int>(flat));
    return k * k;
  }
  int i = static_cast<int>(flat) / M, j = static_cast<int>(flat) % M;
  double kx = g.wavenumber(i), ky = g.wavenumber(j);
  return kx * kx + ky * ky;
}

}  // namespace fracvirial
