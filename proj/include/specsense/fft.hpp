#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "specsense/errors.hpp"

namespace specsense {

/// Unitary FFT helpers on std::complex<double> buffers, backed by FFTW.
///
/// Plans are created once per (size, direction) with FFTW_ESTIMATE and cached
/// for the process lifetime. FFTW_ESTIMATE is mandatory here: FFTW_MEASURE
/// selects algorithms by timing trials, which would make results depend on
/// machine load and break run-to-run determinism. FFTW_UNALIGNED lets the
/// cached plan execute on any caller buffer via the new-array interface.
/// Plan creation is serialized by a mutex (FFTW planning is not thread-safe);
/// fftw_execute_dft on distinct buffers is safe to call concurrently.
namespace fft_detail {

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using PlanPtr = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_plan get_plan(std::size_t n, int sign) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, int>, PlanPtr> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n, sign}];
    if (!slot) {
        std::vector<std::complex<double>> scratch_in(n), scratch_out(n);
        slot.reset(fftw_plan_dft_1d(static_cast<int>(n),
                                    reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                    reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED));
        if (!slot) throw Error("fft: plan creation failed");
    }
    return slot.get();
}

inline void execute(std::size_t n, int sign, const std::complex<double>* in,
                    std::complex<double>* out, double scale) {
    fftw_plan plan = get_plan(n, sign);
    // fftw_execute_dft does not modify the input buffer for out-of-place
    // plans, so the const_cast is safe.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    for (std::size_t i = 0; i < n; ++i) out[i] *= scale;
}

}  // namespace fft_detail

/// out = unitary DFT of in (1/sqrt(n) scaling). in and out must not alias.
inline void fft_forward(const std::complex<double>* in, std::complex<double>* out,
                        std::size_t n) {
    if (n == 0) throw InvalidInputError("fft_forward: empty input");
    fft_detail::execute(n, FFTW_FORWARD, in, out, 1.0 / std::sqrt(static_cast<double>(n)));
}

/// out = unitary inverse DFT of in (1/sqrt(n) scaling). in and out must not alias.
inline void fft_inverse(const std::complex<double>* in, std::complex<double>* out,
                        std::size_t n) {
    if (n == 0) throw InvalidInputError("fft_inverse: empty input");
    fft_detail::execute(n, FFTW_BACKWARD, in, out, 1.0 / std::sqrt(static_cast<double>(n)));
}

inline std::vector<std::complex<double>> fft_forward(const std::vector<std::complex<double>>& in) {
    std::vector<std::complex<double>> out(in.size());
    fft_forward(in.data(), out.data(), in.size());
    return out;
}

inline std::vector<std::complex<double>> fft_inverse(const std::vector<std::complex<double>>& in) {
    std::vector<std::complex<double>> out(in.size());
    fft_inverse(in.data(), out.data(), in.size());
    return out;
}

}  // namespace specsense
