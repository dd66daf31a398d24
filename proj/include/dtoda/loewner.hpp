#ifndef DTODA_LOEWNER_HPP
#define DTODA_LOEWNER_HPP

#include "dtoda/lax.hpp"
#include "dtoda/potential.hpp"

namespace dtoda {

// Loewner coefficients alpha_n = 1/(gamma_n lambda''(gamma_n)).
struct LownerFrame {
    cvector alpha;
    CriticalFrame frame;
    double fd_step = 1e-5;
};

LownerFrame alpha_coeffs(const CriticalFrame& F);

// One-at-a-time central differences in the critical-value coordinates
// lambda_1..lambda_K, re-inverting to natural parameters per probe.
class LambdaChart {
public:
    explicit LambdaChart(const LGPotential& P, double newton_tol = 1e-13);

    const LGPotential& potential() const { return P_; }
    const CriticalFrame& frame() const { return frame_; }
    const cvector& alpha() const { return alpha_; }
    int K() const { return static_cast<int>(frame_.gamma.size()); }
    double lambda_scale() const { return lscale_; }

    // absolute step for coordinate n at relative size h
    double step_for(int n, double h) const;

    // additive shift lambda_n -> lambda_n + delta, frame matched to the center
    InversionResult shifted(int n, cplx delta) const;
    // multiplicative shift lambda_n -> lambda_n e^delta
    InversionResult shifted_log(int n, cplx delta) const;

private:
    LGPotential P_;
    CriticalFrame frame_;
    cvector alpha_;
    double lscale_;
    double tol_;
};

// Branch-free finite difference of log lambda(p) between two nearby
// parameter sets (per-factor quotient logs).
cplx dlog_lambda_between(const LGPotential& plus, const LGPotential& minus, cplx p);

// Max relative residual of the Loewner identity
//   d log lambda(p)/d lambda_n = alpha_n p/(p-gamma_n) d log lambda/dp
// over the frame indices and the supplied sample points.
double loewner_residual(const LGPotential& P, const cvector& p_samples, double h);

// Sample points at a safe distance from {0, b_i, gamma_n}, seeded.
cvector loewner_sample_points(const LGPotential& P, int count, unsigned seed);

struct GTResiduals {
    double gamma = 0.0;     // dgamma_n/dlambda_m vs alpha_m gamma_n/(gamma_m-gamma_n)
    double alpha = 0.0;     // dalpha_n/dlambda_m vs alpha_m alpha_n (gamma_m+gamma_n)/(gamma_m-gamma_n)^2
    double product = 0.0;   // d(alpha_n gamma_n) form
    double quotient = 0.0;  // d(alpha_n/gamma_n) form
    double max() const;
};

// Vacuously zero for K = 1.
GTResiduals gt_residual(const LGPotential& P, double h);

struct PotentialRelationResiduals {
    double u1 = 0.0;   // alpha_n = du1/dlambda_n
    double u2 = 0.0;   // alpha_n gamma_n = du2/dlambda_n
    double phi = 0.0;  // alpha_n/gamma_n = dphi/dlambda_n
    double max() const;
};

// window (when positive) overrides the truncation length used for the Lax
// expansions behind u1, u2.
PotentialRelationResiduals potential_relations_residual(const LGPotential& P, double h,
                                                        int window = -1);

}  // namespace dtoda

#endif
