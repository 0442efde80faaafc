#ifndef FLUIDCTL_RNG_HPP
#define FLUIDCTL_RNG_HPP

#include <cstdint>

namespace fluidctl {

// xoshiro256++ stream seeded through a splitmix64 chain.  Streams are
// derived from (master seed, replication, pair, purpose) by absorbing
// each field into the chain, which keeps every (pair, purpose) stream
// independent of how many pairs or replications a run has.  All
// sampling routines are hand-rolled inverse-CDF so the draws are
// bit-reproducible across standard libraries.
class RngStream {
 public:
  RngStream() : RngStream(0, 0, 0, 0) {}
  RngStream(uint64_t seed, uint64_t replication, uint64_t pair,
            uint64_t purpose);

  uint64_t next_u64();
  double u01();            // uniform in [0, 1)
  double exponential();    // unit-mean
  int poisson(double mean);

 private:
  uint64_t s_[4];
};

// Stream purposes used by the simulator.
enum class RngPurpose : uint64_t {
  kChannelDirect = 0,  // own-link |H_kk|^2 draws
  kChannelCross = 1,   // cross-link row draws
  kArrivals = 2,
};

struct PairStreams {
  RngStream direct;
  RngStream cross;
  RngStream arrivals;
};

PairStreams make_pair_streams(uint64_t seed, uint64_t replication,
                              uint64_t pair);

}  // namespace fluidctl

#endif
