#include "hhgq/fft.hpp"

#include <cassert>
#include <mutex>
#include <stdexcept>

namespace hhgq {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft1d::Fft1d(Eigen::Index n) : n_(n) {
    if (n < 2) throw std::invalid_argument("FFT length must be >= 2");
    std::lock_guard lock(planner_mutex());
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(n)));
    forward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

Fft1d::~Fft1d() {
    std::lock_guard lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
}

Fft1d::Fft1d(Fft1d&& other) noexcept : n_(other.n_), forward_(other.forward_), backward_(other.backward_) {
    other.forward_ = nullptr;
    other.backward_ = nullptr;
}

void Fft1d::forward(Eigen::VectorXcd& v) const {
    assert(v.size() == n_);
    auto* p = reinterpret_cast<fftw_complex*>(v.data());
    if (fftw_alignment_of(reinterpret_cast<double*>(p)) != 0) throw std::logic_error("misaligned FFT buffer");
    fftw_execute_dft(forward_, p, p);
}

void Fft1d::backward(Eigen::VectorXcd& v) const {
    assert(v.size() == n_);
    auto* p = reinterpret_cast<fftw_complex*>(v.data());
    if (fftw_alignment_of(reinterpret_cast<double*>(p)) != 0) throw std::logic_error("misaligned FFT buffer");
    fftw_execute_dft(backward_, p, p);
}

}  // namespace hhgq
