#ifndef DTODA_TESTS_FIXTURES_HPP
#define DTODA_TESTS_FIXTURES_HPP

#include "dtoda/potential.hpp"

namespace dtoda::fixtures {

// dispersionless 1D Toda: lambda = p^{-1}(p-3)(p-1) = p - 4 + 3/p
inline LGPotential toda() {
    return validate_potential(PotentialCase::I, 1, {1.0, 1.0}, {cplx(3.0), cplx(1.0)});
}

// dispersionless Ablowitz-Ladik: lambda = p(p-1)/(p-2)
inline LGPotential ablowitz_ladik() {
    return validate_potential(PotentialCase::I, -1, {1.0, -1.0}, {cplx(1.0), cplx(2.0)});
}

// (p - 1) e^{5/p}
inline LGPotential case2_basic() {
    return validate_potential(PotentialCase::II, 1, {1.0}, {cplx(1.0)}, {cplx(5.0)});
}

// (p - 1) e^{1/p + 5/p^2}: K = 3, N = 2
inline LGPotential case2_k3() {
    return validate_potential(PotentialCase::II, 2, {1.0}, {cplx(1.0)}, {cplx(1.0), cplx(5.0)});
}

// Dubrovin-Zhang subfamily, K = 3: lambda = p^{-1}(p-1)(p-2)(p-3)
inline LGPotential dz_k3() {
    return validate_potential(PotentialCase::I, 1, {1.0, 1.0, 1.0},
                              {cplx(1.0), cplx(2.0), cplx(3.0)});
}

// K = 1: lambda = p^{-1}(p-b)^2, gamma = -b, lambda_1 = -4b
inline LGPotential k1_kappa2(cplx b = cplx(2.0)) {
    return validate_potential(PotentialCase::I, 1, {2.0}, {b});
}

}  // namespace dtoda::fixtures

#endif
