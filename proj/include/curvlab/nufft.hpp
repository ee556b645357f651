#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace detail {

// FFTW's planner is not thread-safe; executes on distinct arrays are.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
};

}  // namespace detail

// One-dimensional type-1 nonuniform FFT by Gaussian gridding:
//   F(k) = sum_j d_j exp(i k y_j),  |k| <= K,
// for a fixed node set y_j and arbitrary strengths d_j.
class Nufft1D {
public:
    static constexpr int kSpread = 12;

    Nufft1D(const std::vector<double>& nodes, int K) : K_(K), n_(nodes.size()) {
        if (K < 0) throw InvalidArgument("Nufft1D: negative mode bound");
        const std::size_t M = 2 * static_cast<std::size_t>(K) + 1;
        mr_ = 16;
        while (mr_ < 2 * M) mr_ *= 2;
        const double R = static_cast<double>(mr_) / static_cast<double>(M);
        tau_ = std::numbers::pi * kSpread / (static_cast<double>(M) * static_cast<double>(M) * R * (R - 0.5));
        const double h = 2.0 * std::numbers::pi / static_cast<double>(mr_);
        base_.resize(n_);
        weights_.resize(n_ * 2 * kSpread);
        for (std::size_t j = 0; j < n_; ++j) {
            double y = std::fmod(nodes[j], 2.0 * std::numbers::pi);
            if (y < 0.0) y += 2.0 * std::numbers::pi;
            const long l0 = static_cast<long>(std::floor(y / h));
            base_[j] = l0 - kSpread + 1;
            for (int q = 0; q < 2 * kSpread; ++q) {
                const double dx = static_cast<double>(base_[j] + q) * h - y;
                weights_[j * 2 * kSpread + q] = std::exp(-dx * dx / (4.0 * tau_));
            }
        }
        deconv_.resize(M);
        for (int k = -K; k <= K; ++k)
            deconv_[static_cast<std::size_t>(k + K)] =
                std::sqrt(std::numbers::pi / tau_) * std::exp(static_cast<double>(k) * k * tau_) / static_cast<double>(mr_);
        detail::FftwBuffer probe(mr_);
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(static_cast<int>(mr_), probe.data, probe.data, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!plan_) throw Error("nufft", "FFTW planning failed");
    }

    ~Nufft1D() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        if (plan_) fftw_destroy_plan(plan_);
    }
    Nufft1D(const Nufft1D&) = delete;
    Nufft1D& operator=(const Nufft1D&) = delete;

    int K() const { return K_; }
    std::size_t grid_size() const { return mr_; }

    // Scratch space per calling thread.
    struct Workspace {
        explicit Workspace(std::size_t n) : grid(n) {}
        detail::FftwBuffer grid;
    };
    Workspace make_workspace() const { return Workspace(mr_); }

    // out[k + K] = F(k) for |k| <= k_max (k_max <= K).
    void transform(const std::complex<double>* d, int k_max, std::complex<double>* out, Workspace& ws) const {
        if (k_max > K_ || k_max < 0) throw InvalidArgument("Nufft1D: k_max out of range");
        fftw_complex* g = ws.grid.data;
        for (std::size_t l = 0; l < mr_; ++l) g[l][0] = g[l][1] = 0.0;
        const long mr = static_cast<long>(mr_);
        for (std::size_t j = 0; j < n_; ++j) {
            const double re = d[j].real(), im = d[j].imag();
            const double* w = &weights_[j * 2 * kSpread];
            long l = base_[j] % mr;
            if (l < 0) l += mr;
            for (int q = 0; q < 2 * kSpread; ++q) {
                g[l][0] += re * w[q];
                g[l][1] += im * w[q];
                if (++l == mr) l = 0;
            }
        }
        fftw_execute_dft(plan_, g, g);
        for (int k = -k_max; k <= k_max; ++k) {
            const std::size_t idx = static_cast<std::size_t>((k % mr + mr) % mr);
            const double c = deconv_[static_cast<std::size_t>(k + K_)];
            out[k + K_] = std::complex<double>(g[idx][0] * c, g[idx][1] * c);
        }
    }

private:
    int K_;
    std::size_t n_;
    std::size_t mr_;
    double tau_;
    std::vector<long> base_;
    std::vector<double> weights_;
    std::vector<double> deconv_;
    fftw_plan plan_ = nullptr;
};

}  // namespace curvlab
