#ifndef DTODA_POTENTIAL_HPP
#define DTODA_POTENTIAL_HPP

#include <Eigen/Dense>

#include "dtoda/common.hpp"

namespace dtoda {

enum class PotentialCase { I, II };

// Landau-Ginzburg potential
//   Case I:  lambda(p) = p^{-N} prod (p - b_i)^{kappa_i},   Mtilde = sum kappa - N > 0, N != 0
//   Case II: lambda(p) = prod (p - b_i)^{kappa_i} exp(sum_{k=1}^N c_k p^{-k}),
//            Mtilde = sum kappa > 0, N > 0, c_N != 0.
struct LGPotential {
    PotentialCase pcase = PotentialCase::I;
    int N = 1;
    std::vector<double> kappa;
    cvector b;
    cvector c;  // Case II only, c[k-1] multiplies p^{-k}

    int M() const { return static_cast<int>(kappa.size()); }
    int K() const { return pcase == PotentialCase::I ? M() : M() + N; }
    double mtilde() const;
};

// Checks every side condition and returns the validated value; throws
// ValidationError naming the violated invariant.
LGPotential validate_potential(PotentialCase pcase, int N, std::vector<double> kappa,
                               cvector b, cvector c = {});

struct LogDerivatives {
    cplx value;   // log lambda(p), principal branch per factor
    cplx first;   // d/dp log lambda, rational
    cplx second;  // d^2/dp^2 log lambda, rational
};

// p must avoid 0 and the zeros b_i.
LogDerivatives log_derivatives(const LGPotential& P, cplx p);
cplx lambda_at(const LGPotential& P, cplx p);

// Numerator polynomial Q of d(log lambda)/dp over the common denominator;
// ascending coefficients, degree M (Case I) or M+N (Case II), leading
// coefficient Mtilde.
cvector q_polynomial(const LGPotential& P);

// Critical points gamma_n (roots of Q), critical values lambda_n and the
// second derivatives lambda''(gamma_n), ordered lexicographically by
// (Re, Im) unless matched against a reference frame.
struct CriticalFrame {
    cvector gamma;
    cvector lam;
    cvector d2;
    double separation = 0.0;
    cvector qcoeffs;
};

CriticalFrame critical_frame(const LGPotential& P);
// Same data with gamma ordered by nearest-neighbor matching to ref.
CriticalFrame critical_frame_matched(const LGPotential& P, const CriticalFrame& ref);

// d lambda_n / d theta_j with theta = (b_1..b_M [, c_1..c_N]); by the
// envelope property the implicit gamma-dependence drops out.
Eigen::MatrixXcd envelope_jacobian(const LGPotential& P, const CriticalFrame& F);

// Packing of the natural parameters into a flat complex vector.
Eigen::VectorXcd pack_params(const LGPotential& P);
LGPotential with_params(const LGPotential& tpl, const Eigen::VectorXcd& theta);

struct InversionResult {
    LGPotential P;
    CriticalFrame frame;  // ordered consistently with the guess frame
    int iters = 0;
    double residual = 0.0;
};

// Solves critical_frame(P).lam == lambda_target by damped Newton starting
// from guess; root ordering follows the guess frame throughout.
InversionResult params_from_lambda(const LGPotential& tpl,
                                   const Eigen::VectorXcd& lambda_target,
                                   const LGPotential& guess,
                                   double tol = 1e-12, int max_iter = 60);

// Roots of a complex polynomial (ascending coefficients): companion-matrix
// eigenvalues plus Newton polish.
cvector polynomial_roots(const cvector& coeffs);

// Greedy global nearest-distance assignment; returns perm with
// target[i] ~ source[perm[i]].  Throws on ambiguous (non-injective) matches.
std::vector<int> nearest_match(const cvector& source, const cvector& target);

}  // namespace dtoda

#endif
