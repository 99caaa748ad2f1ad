#pragma once
#include "fracvirial/grid.hpp"

namespace fracvirial {

// In-place c2c transforms. forward_fft is the plain DFT sum; inverse_fft
// includes the 1/M^dim normalization so inverse(forward(u)) == u.
// Plans are cached per (dim, M, direction) and guarded by a mutex; execution
// on caller-owned buffers is safe from concurrent workers.
void forward_fft(FieldOnGrid& u);
void inverse_fft(FieldOnGrid& u);

FieldOnGrid forward_fft_copy(const FieldOnGrid& u);
FieldOnGrid inverse_fft_copy(const FieldOnGrid& u);

// Spectral gradient components: out[d] = inverse FFT of (i xi_d) uhat.
// Input is the *spectral* field uhat (forward transform of u).
std::vector<FieldOnGrid> gradient_from_spectrum(const FieldOnGrid& uhat);

// Zero-pad a spectral field onto a grid with `factor` times the points per
// dimension (same box). Coefficients are scaled so that the inverse FFT of
// the result samples the same trigonometric polynomial.
FieldOnGrid pad_spectrum(const FieldOnGrid& uhat, int factor);

// |xi|^2 at flat index.
double xi_sq_at(const Grid& g, std::size_t flat);

}  // namespace fracvirial
