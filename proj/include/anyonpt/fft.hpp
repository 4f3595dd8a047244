#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "anyonpt/errors.hpp"

namespace anyonpt {

namespace detail {

// FFTW's planner is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace detail

/// Forward/backward complex FFT pair of fixed length with its own buffer.
/// The round trip forward + backward multiplies by size().
class FftPair {
public:
    explicit FftPair(std::size_t n) : n_(n) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        if (!buf_) throw NumericalError("FftPair: allocation failed");
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) {
            release();
            throw NumericalError("FftPair: planning failed");
        }
    }

    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;
    ~FftPair() { release(); }

    std::size_t size() const { return n_; }

    void forward(std::vector<std::complex<double>>& data) { run(fwd_, data); }
    void backward(std::vector<std::complex<double>>& data) { run(bwd_, data); }

private:
    void run(fftw_plan plan, std::vector<std::complex<double>>& data) {
        if (data.size() != n_) throw ContractError("FftPair: length mismatch");
        auto* raw = reinterpret_cast<std::complex<double>*>(buf_);
        std::copy(data.begin(), data.end(), raw);
        fftw_execute(plan);
        std::copy(raw, raw + n_, data.begin());
    }

    void release() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
        if (buf_) fftw_free(buf_);
        fwd_ = bwd_ = nullptr;
        buf_ = nullptr;
    }

    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace anyonpt
