#pragma once

#include <string>
#include <vector>

#include "webca/errors.hpp"

namespace webca::sensing {

enum class WaveletFamily { Haar, Db4, MorletApprox };

struct WaveletSpec {
    WaveletFamily family = WaveletFamily::Haar;
    int levels = 1;
};

WaveletFamily wavelet_family_from_name(const std::string& name);
std::string wavelet_family_name(WaveletFamily f);
bool is_orthonormal(WaveletFamily f);

// Multi-level periodized filter-bank decomposition. Coefficient layout:
// [approx_L | detail_L | detail_{L-1} | ... | detail_1], total length N.
// Orthonormal families (Haar, Db4) satisfy Parseval and exact inversion;
// MorletApprox is a redundancy-free bandpass pyramid with an adjoint-based
// approximate inverse.
std::vector<double> wavelet_decompose(const std::vector<double>& samples, const WaveletSpec& spec);
std::vector<double> wavelet_reconstruct(const std::vector<double>& coefficients,
                                        const WaveletSpec& spec);

// Index of the leading (first) approximation coefficient is always 0.
// Approximation block length for window N at the spec's level count:
size_t approx_length(size_t n, const WaveletSpec& spec);

}  // namespace webca::sensing
