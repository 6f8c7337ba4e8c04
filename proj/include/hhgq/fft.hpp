#pragma once

#include <Eigen/Core>
#include <fftw3.h>

namespace hhgq {

// In-place complex 1D FFT of fixed length. Plans use FFTW_ESTIMATE so the
// chosen algorithm (and therefore every output bit) does not depend on timing.
// Unnormalized in both directions. Buffers must carry the default Eigen
// (SIMD) alignment.
class Fft1d {
public:
    explicit Fft1d(Eigen::Index n);
    ~Fft1d();
    Fft1d(const Fft1d&) = delete;
    Fft1d& operator=(const Fft1d&) = delete;
    Fft1d(Fft1d&& other) noexcept;
    Fft1d& operator=(Fft1d&&) = delete;

    void forward(Eigen::VectorXcd& v) const;
    void backward(Eigen::VectorXcd& v) const;
    Eigen::Index size() const { return n_; }

private:
    Eigen::Index n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace hhgq
