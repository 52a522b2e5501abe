#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

namespace msalab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval; nullopt when there are no trials.
inline std::optional<Interval> wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = 1.959963984540054) {
  if (trials == 0) return std::nullopt;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return Interval{lo, hi};
}

/// Success count over independent trials. Merging tallies of disjoint trial
/// ranges gives the pooled tally.
struct Tally {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;

  void add(bool hit) {
    hits += hit ? 1 : 0;
    ++trials;
  }
  Tally& merge(const Tally& other) {
    hits += other.hits;
    trials += other.trials;
    return *this;
  }
  std::optional<double> frequency() const {
    if (trials == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(trials);
  }
  std::optional<Interval> ci() const { return wilson_interval(hits, trials); }

  friend bool operator==(const Tally&, const Tally&) = default;
};

/// Runs fn(trial) for trial in [first, first + count) on a pool of workers and
/// returns the results indexed by trial. The output does not depend on the
/// worker count. If any trial throws, the exception of the lowest failing
/// trial is rethrown after all workers have joined.
template <class Fn>
auto map_trials(std::uint64_t first, std::uint64_t count, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::uint64_t{}))> {
  using R = decltype(fn(std::uint64_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t k = next.fetch_add(1); k < count; k = next.fetch_add(1)) {
      try {
        slots[k].emplace(fn(first + k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(count, 1))));
  if (n == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace msalab
