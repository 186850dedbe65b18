#pragma once

// Thin RAII wrappers over FFTW plans. Plans are made with FFTW_ESTIMATE so
// that results are bit-reproducible run to run, and FFTW_UNALIGNED so that a
// plan can be executed on any std::vector buffer of the planned size.

#include <fftw3.h>

#include <complex>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "gravdec/error.hpp"

namespace gravdec {

using cplx = std::complex<double>;

/// Complex DFT over a row-major array of the given shape (1 to 3 axes).
/// Transforms are unnormalized; backward(forward(x)) = size() * x.
class ComplexFft {
 public:
  explicit ComplexFft(std::vector<int> shape) : shape_(std::move(shape)) {
    require(!shape_.empty() && shape_.size() <= 3, "FFT rank must be 1..3");
    size_ = std::accumulate(shape_.begin(), shape_.end(), std::size_t{1}, std::multiplies<>());
    std::vector<cplx> scratch(size_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft(int(shape_.size()), shape_.data(), p, p, FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft(int(shape_.size()), shape_.data(), p, p, FFTW_BACKWARD, flags);
  }
  ~ComplexFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const { return size_; }
  const std::vector<int>& shape() const { return shape_; }

  void forward(std::span<cplx> data) const { run(fwd_, data); }
  void backward(std::span<cplx> data) const { run(bwd_, data); }

 private:
  void run(fftw_plan plan, std::span<cplx> data) const {
    require(data.size() == size_, "FFT buffer size mismatch");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  std::vector<int> shape_;
  std::size_t size_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Type-I discrete sine transform (FFTW RODFT00) of length n. It is its own
/// inverse up to the factor 2(n+1).
class SineTransform {
 public:
  explicit SineTransform(int n) : n_(n) {
    require(n >= 1, "DST length must be positive");
    std::vector<double> scratch(n);
    plan_ = fftw_plan_r2r_1d(n, scratch.data(), scratch.data(), FFTW_RODFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~SineTransform() { fftw_destroy_plan(plan_); }
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  int size() const { return n_; }
  double inverse_scale() const { return 1.0 / (2.0 * (n_ + 1)); }

  void apply(std::span<double> data) const {
    require(data.size() == std::size_t(n_), "DST buffer size mismatch");
    fftw_execute_r2r(plan_, data.data(), data.data());
  }

  /// Transforms real and imaginary parts separately.
  void apply(std::span<cplx> data, std::vector<double>& re, std::vector<double>& im) const {
    require(data.size() == std::size_t(n_), "DST buffer size mismatch");
    re.resize(n_);
    im.resize(n_);
    for (int i = 0; i < n_; ++i) {
      re[i] = data[i].real();
      im[i] = data[i].imag();
    }
    apply(std::span<double>(re));
    apply(std::span<double>(im));
    for (int i = 0; i < n_; ++i) data[i] = {re[i], im[i]};
  }

 private:
  int n_;
  fftw_plan plan_ = nullptr;
};

/// Angular wavenumber of FFT bin i on a periodic grid of n points, spacing h.
inline double fft_wavenumber(int i, int n, double h) {
  const int j = (i <= n / 2) ? i : i - n;
  return 2.0 * 3.14159265358979323846 * double(j) / (double(n) * h);
}

}  // namespace gravdec
