#ifndef CLTR_ALIAS_HPP
#define CLTR_ALIAS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <new>
#include <stdexcept>
#include <vector>

#if defined(__linux__)
#include <sys/mman.h>
#endif

#include "cltr/click_log.hpp"
#include "cltr/rng.hpp"

namespace cltr {

// Allocator that requests transparent huge pages for large blocks. Draws hit
// the table at random addresses, so TLB coverage dominates throughput once
// the table outgrows the cache.
template <typename T>
struct HugePageAllocator {
  using value_type = T;

  HugePageAllocator() = default;
  template <typename U>
  HugePageAllocator(const HugePageAllocator<U>&) {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = n * sizeof(T);
    constexpr std::size_t kHugePage = std::size_t{1} << 21;
    const std::size_t align =
        bytes >= kHugePage ? kHugePage
                           : std::max(alignof(T), sizeof(void*));
    void* p = nullptr;
    if (posix_memalign(&p, align, bytes)) throw std::bad_alloc();
#if defined(__linux__)
    if (bytes >= kHugePage) madvise(p, bytes, MADV_HUGEPAGE);
#endif
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }

  template <typename U>
  bool operator==(const HugePageAllocator<U>&) const {
    return true;
  }
};

// IPS-proportional sampling distribution over the entries of a click log:
// P(i) = (1/p_i) / sum_j (1/p_j).
inline Eigen::VectorXd ips_distribution(const ClickLog& log) {
  if (log.entries.empty())
    throw std::invalid_argument("ips_distribution: empty click log");
  Eigen::VectorXd probs(static_cast<long>(log.entries.size()));
  for (long i = 0; i < probs.size(); ++i) {
    const double p = log.entries[static_cast<std::size_t>(i)].propensity;
    if (p <= 0.0)
      throw std::invalid_argument("ips_distribution: non-positive propensity");
    probs[i] = 1.0 / p;
  }
  probs /= probs.sum();
  return probs;
}

// Walker/Vose alias table: O(n) construction, two uniform draws per sample.
// Acceptance probability and fallback index are packed per slot so a draw
// touches a single cache line.
struct AliasTable {
  struct Slot {
    double prob;  // acceptance probability, in [0,1]
    int alias;    // fallback index
  };
  std::vector<Slot, HugePageAllocator<Slot>> slots;

  int size() const { return static_cast<int>(slots.size()); }
};

inline AliasTable build_alias(const Eigen::VectorXd& dist) {
  const long n = dist.size();
  if (n == 0) throw std::invalid_argument("build_alias: empty distribution");
  for (long i = 0; i < n; ++i)
    if (!(dist[i] > 0.0) || !std::isfinite(dist[i]))
      throw std::invalid_argument("build_alias: probabilities must be positive");
  if (std::abs(dist.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("build_alias: probabilities must sum to 1");

  AliasTable table;
  table.slots.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd scaled = dist * static_cast<double>(n);
  std::vector<int> small, large;
  small.reserve(n);
  large.reserve(n);
  for (long i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<int>(i));
  while (!small.empty() && !large.empty()) {
    const int s = small.back();
    const int l = large.back();
    small.pop_back();
    large.pop_back();
    table.slots[s] = {scaled[s], l};
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  // floating-point leftovers: both worklists hold mass ~1
  for (int i : large) table.slots[i] = {1.0, i};
  for (int i : small) table.slots[i] = {1.0, i};
  return table;
}

// Consumes exactly two uniform draws (slot, coin) per call.
inline int draw(const AliasTable& table, Rng& rng) {
  const int i = rng.next_index(table.size());
  const double coin = rng.next_double();
  const AliasTable::Slot& slot = table.slots[i];
  return coin < slot.prob ? i : slot.alias;
}

// Distribution implied by a built table; used to check the construction.
inline Eigen::VectorXd reconstructed_distribution(const AliasTable& table) {
  const long n = table.size();
  Eigen::VectorXd out(n);
  for (long i = 0; i < n; ++i) out[i] = table.slots[i].prob;
  for (long i = 0; i < n; ++i)
    out[table.slots[i].alias] += 1.0 - table.slots[i].prob;
  return out / static_cast<double>(n);
}

}  // namespace cltr

#endif  // CLTR_ALIAS_HPP
