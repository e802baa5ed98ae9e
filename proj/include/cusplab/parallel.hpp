#ifndef CUSPLAB_PARALLEL_HPP
#define CUSPLAB_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace cusplab {

// Worker cap shared by all parallel loops; 0 means hardware concurrency.
void set_thread_count(int k);
int thread_count();

namespace detail {
inline std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{0};
  return cap;
}
}  // namespace detail

inline void set_thread_count(int k) { detail::thread_cap().store(k); }

inline int thread_count() {
  const int cap = detail::thread_cap().load();
  if (cap > 0) return cap;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Deterministic parallel reduction. The index range is cut into fixed-size
// blocks; each block is accumulated sequentially and block results are
// combined in block order, so the result does not depend on how many workers
// ran. `zero` must be the additive identity for `combine`.
template <typename T, typename Eval, typename Combine>
T parallel_reduce(std::size_t count, const T& zero, Eval eval, Combine combine,
                  std::size_t block_size = 1024) {
  if (count == 0) return zero;
  const std::size_t n_blocks = (count + block_size - 1) / block_size;
  std::vector<T> partial(n_blocks, zero);

  const int workers = std::min<int>(thread_count(), static_cast<int>(n_blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) {
      T acc = zero;
      const std::size_t lo = b * block_size;
      const std::size_t hi = std::min(count, lo + block_size);
      for (std::size_t i = lo; i < hi; ++i) acc = combine(acc, eval(i));
      partial[b] = acc;
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= n_blocks) return;
        T acc = zero;
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(count, lo + block_size);
        for (std::size_t i = lo; i < hi; ++i) acc = combine(acc, eval(i));
        partial[b] = acc;
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  T total = zero;
  for (std::size_t b = 0; b < n_blocks; ++b) total = combine(total, partial[b]);
  return total;
}

// Deterministic parallel map: out[i] = eval(i).
template <typename T, typename Eval>
std::vector<T> parallel_map(std::size_t count, Eval eval) {
  std::vector<T> out(count);
  const int workers = std::min<int>(thread_count(), 64);
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out[i] = eval(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      out[i] = eval(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace cusplab

#endif
