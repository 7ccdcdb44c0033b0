#include "webca/wavelet.hpp"

#include <cmath>
#include <cstddef>

namespace webca::sensing {

namespace {

bool power_of_two(size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

struct FilterPair {
    std::vector<double> lo;
    std::vector<double> hi;
};

FilterPair filters_for(WaveletFamily f) {
    switch (f) {
        case WaveletFamily::Haar: {
            const double s = 1.0 / std::sqrt(2.0);
            return {{s, s}, {s, -s}};
        }
        case WaveletFamily::Db4: {
            // 4-tap Daubechies pair.
            const double r3 = std::sqrt(3.0);
            const double n = 4.0 * std::sqrt(2.0);
            std::vector<double> lo = {(1 + r3) / n, (3 + r3) / n, (3 - r3) / n, (1 - r3) / n};
            std::vector<double> hi(4);
            for (int m = 0; m < 4; ++m) hi[m] = (m % 2 ? -1.0 : 1.0) * lo[3 - static_cast<size_t>(m)];
            return {lo, hi};
        }
        case WaveletFamily::MorletApprox: {
            // Gaussian-windowed cosine detail filter plus a binomial smoother.
            // Deliberately not a quadrature-mirror pair.
            std::vector<double> lo = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
            const double g = std::sqrt(2.0);
            for (auto& v : lo) v *= g;
            std::vector<double> hi(8);
            const double c = 3.5, sigma = 1.5, w0 = 2.0;
            double mean = 0.0;
            for (int m = 0; m < 8; ++m) {
                const double u = m - c;
                hi[static_cast<size_t>(m)] = std::cos(w0 * u) * std::exp(-u * u / (2 * sigma * sigma));
                mean += hi[static_cast<size_t>(m)];
            }
            mean /= 8.0;
            double e = 0.0;
            for (auto& v : hi) {
                v -= mean;
                e += v * v;
            }
            const double inv = 1.0 / std::sqrt(e);
            for (auto& v : hi) v *= inv;
            return {lo, hi};
        }
    }
    throw UnknownWaveletFamily("unknown wavelet family id");
}

void analysis_step(const std::vector<double>& x, const FilterPair& fp,
                   std::vector<double>& approx, std::vector<double>& detail) {
    const size_t n = x.size();
    const size_t half = n / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (size_t k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (size_t m = 0; m < fp.lo.size(); ++m) a += fp.lo[m] * x[(2 * k + m) % n];
        for (size_t m = 0; m < fp.hi.size(); ++m) d += fp.hi[m] * x[(2 * k + m) % n];
        approx[k] = a;
        detail[k] = d;
    }
}

std::vector<double> synthesis_step(const std::vector<double>& approx,
                                   const std::vector<double>& detail, const FilterPair& fp) {
    const size_t n = approx.size() * 2;
    std::vector<double> x(n, 0.0);
    for (size_t k = 0; k < approx.size(); ++k) {
        for (size_t m = 0; m < fp.lo.size(); ++m) x[(2 * k + m) % n] += fp.lo[m] * approx[k];
        for (size_t m = 0; m < fp.hi.size(); ++m) x[(2 * k + m) % n] += fp.hi[m] * detail[k];
    }
    return x;
}

void check_spec(size_t n, const WaveletSpec& spec) {
    if (!power_of_two(n)) throw BadWindowLength("window length must be a power of two >= 2");
    if (spec.levels < 1) throw SpecMismatch("wavelet levels must be >= 1");
    if (n >> spec.levels == 0 || (n >> spec.levels) * (1u << spec.levels) != n || (n >> spec.levels) < 1)
        throw BadWindowLength("window too short for requested level count");
}

}  // namespace

WaveletFamily wavelet_family_from_name(const std::string& name) {
    if (name == "haar") return WaveletFamily::Haar;
    if (name == "db4") return WaveletFamily::Db4;
    if (name == "morlet") return WaveletFamily::MorletApprox;
    throw UnknownWaveletFamily("unknown wavelet family: " + name);
}

std::string wavelet_family_name(WaveletFamily f) {
    switch (f) {
        case WaveletFamily::Haar: return "haar";
        case WaveletFamily::Db4: return "db4";
        case WaveletFamily::MorletApprox: return "morlet";
    }
    return "?";
}

bool is_orthonormal(WaveletFamily f) { return f != WaveletFamily::MorletApprox; }

size_t approx_length(size_t n, const WaveletSpec& spec) {
    check_spec(n, spec);
    return n >> spec.levels;
}

std::vector<double> wavelet_decompose(const std::vector<double>& samples, const WaveletSpec& spec) {
    const size_t n = samples.size();
    check_spec(n, spec);
    const FilterPair fp = filters_for(spec.family);

    std::vector<double> out(n);
    std::vector<double> cur = samples;
    size_t write_end = n;  // details stack from the back: d1 last
    for (int lvl = 0; lvl < spec.levels; ++lvl) {
        std::vector<double> a, d;
        analysis_step(cur, fp, a, d);
        write_end -= d.size();
        for (size_t i = 0; i < d.size(); ++i) out[write_end + i] = d[i];
        cur = std::move(a);
    }
    for (size_t i = 0; i < cur.size(); ++i) out[i] = cur[i];
    return out;
}

std::vector<double> wavelet_reconstruct(const std::vector<double>& coefficients,
                                        const WaveletSpec& spec) {
    const size_t n = coefficients.size();
    check_spec(n, spec);
    const FilterPair fp = filters_for(spec.family);

    size_t alen = n >> spec.levels;
    std::vector<double> cur(coefficients.begin(),
                            coefficients.begin() + static_cast<std::ptrdiff_t>(alen));
    size_t read = alen;
    for (int lvl = spec.levels; lvl >= 1; --lvl) {
        std::vector<double> d(coefficients.begin() + static_cast<std::ptrdiff_t>(read),
                              coefficients.begin() + static_cast<std::ptrdiff_t>(read + alen));
        read += alen;
        cur = synthesis_step(cur, d, fp);
        alen *= 2;
    }
    return cur;
}

}  // namespace webca::sensing
