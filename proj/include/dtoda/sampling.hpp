#ifndef DTODA_SAMPLING_HPP
#define DTODA_SAMPLING_HPP

#include <random>

#include "dtoda/potential.hpp"

namespace dtoda {

// Random valid models with well-separated critical frames, for the
// randomized property suites.  Rejection-sampled so that downstream
// finite-difference probes are well conditioned.
LGPotential random_model(std::mt19937& rng, PotentialCase pcase);

}  // namespace dtoda

#endif
