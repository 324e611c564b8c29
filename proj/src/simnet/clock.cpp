#include "icstack/simnet/clock.hpp"

#include <algorithm>

namespace icstack::sim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(mix64(mix64(seed) ^ a) ^ b) ^ c);
}

DriftClock::DriftClock(Time max_drift, DriftMode mode, std::uint64_t seed)
    : max_drift_(std::max<Time>(0, max_drift)), mode_(mode), rng_(seed) {
  Time start_offset = 0;
  if (mode_ == DriftMode::RandomWalk && max_drift_ > 0) {
    start_offset = static_cast<Time>(rng_() % static_cast<std::uint64_t>(max_drift_ + 1));
  }
  segments_.push_back({0, start_offset, 0});
  if (mode_ == DriftMode::None || max_drift_ == 0) {
    covered_until_ = INT64_MAX;
  }
}

void DriftClock::extend_to(Time global) {
  while (covered_until_ <= global) {
    Segment& last = segments_.back();
    // Close the current segment at covered_until_ and open a new one.
    const Time off = last.offset + last.slope * (covered_until_ - last.start);
    int slope = static_cast<int>(rng_() % 3) - 1;
    Time room = 0;
    if (slope > 0) room = max_drift_ - off;
    if (slope < 0) room = off + max_drift_;
    const auto max_len = static_cast<std::uint64_t>(2 * max_drift_ + 2);
    Time len = 1 + static_cast<Time>(rng_() % max_len);
    if (slope != 0) {
      if (room <= 0) {
        slope = 0;
      } else {
        len = std::min(len, room);
      }
    }
    segments_.push_back({covered_until_, off, slope});
    covered_until_ += len;
  }
}

Time DriftClock::offset_at(Time global) {
  if (global < 0) global = 0;
  extend_to(global);
  auto it = std::upper_bound(segments_.begin(), segments_.end(), global,
                             [](Time g, const Segment& s) { return g < s.start; });
  const Segment& s = *(it - 1);
  return s.offset + s.slope * (global - s.start);
}

Time DriftClock::first_global_at_local(Time local) {
  // local_of is nondecreasing and within max_drift of the identity.
  Time lo = std::max<Time>(0, local - max_drift_);
  Time hi = std::max<Time>(0, local + max_drift_);
  if (local_of(lo) >= local) return lo;
  while (hi - lo > 1) {
    const Time mid = lo + (hi - lo) / 2;
    if (local_of(mid) >= local) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace icstack::sim
