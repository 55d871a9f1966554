#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

#include "bispec/error.hpp"

namespace bispec {

namespace detail {

// FFTW planning is not thread-safe; execution through the new-array interface is.
// Plans are cached for the life of the process and never destroyed.
inline std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct PlanKey {
  int rank;
  int n0;
  int n1;
  int howmany;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

inline fftw_plan cached_plan(const PlanKey& key) {
  static std::map<PlanKey, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const std::size_t per = static_cast<std::size_t>(key.n0) * (key.rank == 2 ? key.n1 : 1);
  std::vector<std::complex<double>> scratch(per * key.howmany);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = nullptr;
  if (key.rank == 1) {
    int n[1] = {key.n0};
    plan = fftw_plan_many_dft(1, n, key.howmany, buf, nullptr, 1, key.n0, buf, nullptr, 1,
                              key.n0, key.sign, flags);
  } else {
    int n[2] = {key.n0, key.n1};
    plan = fftw_plan_many_dft(2, n, key.howmany, buf, nullptr, 1, key.n0 * key.n1, buf,
                              nullptr, 1, key.n0 * key.n1, key.sign, flags);
  }
  if (plan == nullptr) throw Error("FFTW failed to create a plan");
  cache.emplace(key, plan);
  return plan;
}

}  // namespace detail

/// Batched in-place 1-d transforms of `howmany` contiguous rows of length n.
/// forward: X_m = sum_p x_p e^{-2 pi i m p / n}; backward uses e^{+...}; neither is scaled.
class BatchedFft {
 public:
  BatchedFft() = default;
  BatchedFft(std::size_t n, std::size_t howmany)
      : n_(n),
        howmany_(howmany),
        fwd_(detail::cached_plan({1, int(n), 0, int(howmany), FFTW_FORWARD})),
        bwd_(detail::cached_plan({1, int(n), 0, int(howmany), FFTW_BACKWARD})) {}

  void forward(std::vector<std::complex<double>>& data) const { run(fwd_, data); }
  void backward(std::vector<std::complex<double>>& data) const { run(bwd_, data); }

  std::size_t length() const { return n_; }
  std::size_t rows() const { return howmany_; }

 private:
  void run(fftw_plan plan, std::vector<std::complex<double>>& data) const {
    if (data.size() != n_ * howmany_) throw DimensionMismatch("FFT buffer size");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  std::size_t n_ = 0;
  std::size_t howmany_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// In-place 2-d transform of a square n x n array (row-major), same sign conventions.
class SquareFft {
 public:
  SquareFft() = default;
  explicit SquareFft(std::size_t n)
      : n_(n),
        fwd_(detail::cached_plan({2, int(n), int(n), 1, FFTW_FORWARD})),
        bwd_(detail::cached_plan({2, int(n), int(n), 1, FFTW_BACKWARD})) {}

  void forward(std::vector<std::complex<double>>& data) const { run(fwd_, data); }
  void backward(std::vector<std::complex<double>>& data) const { run(bwd_, data); }
  std::size_t length() const { return n_; }

 private:
  void run(fftw_plan plan, std::vector<std::complex<double>>& data) const {
    if (data.size() != n_ * n_) throw DimensionMismatch("2-d FFT buffer size");
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  std::size_t n_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
inline std::size_t next_smooth_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace bispec
