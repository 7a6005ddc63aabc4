#pragma once

// Deterministic chunked reductions.
//
// Work is cut into chunks of a fixed size that does not depend on the worker
// count. Each chunk produces a partial result; partials are combined on the
// calling thread in chunk-index order. For a fixed chunk size the combined
// result is therefore bit-identical for any number of threads.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ineq {

inline constexpr std::size_t kDefaultChunkSize = std::size_t{1} << 16;

struct Exec {
  unsigned threads = 1;
  std::size_t chunk_size = kDefaultChunkSize;

  static Exec hardware() {
    return Exec{std::max(1u, std::thread::hardware_concurrency()), kDefaultChunkSize};
  }

  /// INEQ_THREADS wins over any explicit request.
  static Exec from_env(unsigned requested) {
    Exec e{std::max(1u, requested), kDefaultChunkSize};
    if (const char* env = std::getenv("INEQ_THREADS"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) e.threads = static_cast<unsigned>(v);
    }
    return e;
  }
};

/// Neumaier's variant of Kahan summation. Robust when the addend is larger
/// than the running sum.
class CompensatedSum {
public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  void merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

/// Runs fn(chunk_index, begin, end) for every chunk of [0, n). Chunks are
/// claimed dynamically; fn must only write state owned by its chunk.
template <class Fn>
void for_each_chunk(std::size_t n, const Exec& exec, Fn&& fn) {
  const std::size_t chunk = std::max<std::size_t>(1, exec.chunk_size);
  const std::size_t chunks = chunk_count(n, chunk);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, exec.threads), chunks));

  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks) return;
      try {
        fn(c, c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();  // joins
  if (failure) std::rethrow_exception(failure);
}

/// Maps every chunk to a Partial and returns the partials in chunk order.
template <class Partial, class Fn>
std::vector<Partial> map_chunks(std::size_t n, const Exec& exec, Fn&& fn) {
  std::vector<Partial> partials(chunk_count(n, std::max<std::size_t>(1, exec.chunk_size)));
  for_each_chunk(n, exec, [&](std::size_t c, std::size_t begin, std::size_t end) {
    partials[c] = fn(begin, end);
  });
  return partials;
}

/// Compensated sum of f(i) over [0, n), reproducible for any thread count.
template <class Fn>
double reduce_sum(std::size_t n, const Exec& exec, Fn&& f) {
  const auto partials = map_chunks<CompensatedSum>(n, exec, [&](std::size_t b, std::size_t e) {
    CompensatedSum s;
    for (std::size_t i = b; i < e; ++i) s.add(f(i));
    return s;
  });
  CompensatedSum total;
  for (const auto& p : partials) total.merge(p);
  return total.value();
}

}  // namespace ineq
