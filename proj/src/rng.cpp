#include "shredrom/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace shredrom {

double SplitMix64::normal() {
  // Ziggurat sampler; stateless, so each call consumes only this stream.
  boost::random::normal_distribution<double> dist;
  return dist(*this);
}

}  // namespace shredrom
