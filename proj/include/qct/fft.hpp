#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace qct {

using cplx = std::complex<double>;

// Allocator returning 64-byte aligned storage so that every buffer handed to
// FFTW has the alignment the plans were created with.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new[](n * sizeof(T), std::align_val_t{64}));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete[](p, std::align_val_t{64}); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVector = std::vector<cplx, AlignedAllocator<cplx>>;

// In-place 1-D complex FFT of fixed length. Transforms are unnormalized:
// inverse(forward(v)) == n * v. Plans are shared per length and created with
// FFTW_ESTIMATE, so results are bitwise reproducible; execution is thread-safe.
class Fft {
 public:
  explicit Fft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  // sum_j v_j exp(-2 pi i jk/n)
  void forward(std::span<cplx> v) const;
  // sum_k v_k exp(+2 pi i jk/n)
  void inverse(std::span<cplx> v) const;

  struct Plans;

 private:
  std::size_t n_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace qct
