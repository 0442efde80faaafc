#include "fluidctl/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fluidctl {

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t replication, uint64_t pair,
                     uint64_t purpose) {
  uint64_t chain = seed;
  (void)splitmix64(chain);
  chain ^= splitmix64(chain) + replication;
  chain ^= splitmix64(chain) + pair;
  chain ^= splitmix64(chain) + purpose;
  for (auto& w : s_) w = splitmix64(chain);
}

uint64_t RngStream::next_u64() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::u01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log1p(-u01()); }

int RngStream::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: negative mean");
  if (mean == 0.0) return 0;
  // Inversion by sequential search; fine for the small per-epoch means
  // used here.
  const double u = u01();
  double p = std::exp(-mean);
  double cum = p;
  int k = 0;
  while (u > cum && k < 100000) {
    ++k;
    p *= mean / k;
    cum += p;
  }
  return k;
}

PairStreams make_pair_streams(uint64_t seed, uint64_t replication,
                              uint64_t pair) {
  return {RngStream(seed, replication, pair,
                    static_cast<uint64_t>(RngPurpose::kChannelDirect)),
          RngStream(seed, replication, pair,
                    static_cast<uint64_t>(RngPurpose::kChannelCross)),
          RngStream(seed, replication, pair,
                    static_cast<uint64_t>(RngPurpose::kArrivals))};
}

}  // namespace fluidctl
