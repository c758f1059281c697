#include "qct/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace qct {

struct Fft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
  }
};

namespace {

// FFTW's planner is not thread-safe; all planning goes through this lock.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::shared_ptr<const Fft::Plans> plans_for(std::size_t n) {
  static std::map<std::size_t, std::shared_ptr<const Fft::Plans>> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  CVector scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  auto plans = std::make_shared<Fft::Plans>();
  const int len = static_cast<int>(n);
  plans->fwd = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plans->inv = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans->fwd || !plans->inv) throw std::runtime_error("FFTW planning failed");
  cache.emplace(n, plans);
  return plans;
}

void check_alignment(std::span<cplx> v, std::size_t n) {
  if (v.size() != n) throw std::invalid_argument("FFT length mismatch");
  if (fftw_alignment_of(reinterpret_cast<double*>(v.data())) != 0)
    throw std::invalid_argument("FFT buffer misaligned");
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n), plans_(plans_for(n)) {}

void Fft::forward(std::span<cplx> v) const {
  check_alignment(v, n_);
  auto* buf = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(plans_->fwd, buf, buf);
}

void Fft::inverse(std::span<cplx> v) const {
  check_alignment(v, n_);
  auto* buf = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(plans_->inv, buf, buf);
}

}  // namespace qct
