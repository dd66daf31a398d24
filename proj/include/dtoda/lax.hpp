#ifndef DTODA_LAX_HPP
#define DTODA_LAX_HPP

#include "dtoda/potential.hpp"
#include "dtoda/series.hpp"

namespace dtoda {

enum class LaxSide { ZAtInfinity, ZbarAtZero };

// A flow of the hierarchy: t_n (generated by B_n from z) or tbar_n
// (generated by Bbar_n from zbar).
struct FlowIndex {
    LaxSide side = LaxSide::ZAtInfinity;
    int n = 1;
};

// z(p) = p + u1 + u2/p + ...  at infinity, or
// zbar(p) = e^phi/p (1 + ...) at zero.
struct LaxExpansion {
    LaxSide side = LaxSide::ZAtInfinity;
    TruncatedSeries series;
    cplx u1{0.0}, u2{0.0};
    cplx phi{0.0};  // zbar side only
};

// exp(N phi): prod (-b_i)^{kappa_i} in Case I, c_N in Case II.  Branch-free
// in the sense that only principal powers of the individual factors enter.
cplx exp_Nphi(const LGPotential& P);

// Branch-safe expansion of the reduced Lax function on the requested side.
// The default phi is the principal value Log(exp_Nphi)/N; passing phi_ref
// selects the branch nearest to a reference value so that finite-difference
// probes see a continuous function of the parameters.
LaxExpansion expand_lax(const LGPotential& P, LaxSide side, int window,
                        const cplx* phi_ref = nullptr);

// Flow generator as an exact Laurent polynomial: B_n = (z^n)_{>=0}
// (exponents 0..n) or Bbar_n = (zbar^n)_{<0} (exponents -n..-1).
TruncatedSeries generator(const LGPotential& P, LaxSide side, int n,
                          int window = -1, const cplx* phi_ref = nullptr);

// Right-hand sides of the induced evolution equations: given the
// s-derivatives of the parameters, the Poisson bracket {B_n, log lambda}
// is a rational function
//   -sum_i kappa_i F_i/(p - b_i) + sum_k G_k p^{-k},
// recovered here by residue extraction at the simple poles b_i and series
// expansion at 0.  F_i = db_i/dt_flow, G_k = dc_k/dt_flow.
struct EvolutionRHS {
    cvector F;                        // size M
    cvector G;                        // size N (Case II), empty otherwise
    double complement_residual = 0;   // polynomial remainder plus deep-pole leakage
};

EvolutionRHS evolution_rhs(const LGPotential& P, const cvector& db_ds,
                           const cvector& dc_ds, FlowIndex flow,
                           double fd_step = 1e-6);

// Central finite differences of the generator coefficients with respect to
// one natural parameter (exposed for cross-module verification).
TruncatedSeries generator_param_derivative(const LGPotential& P, LaxSide side,
                                           int n, int param_index, double fd_step);

}  // namespace dtoda

#endif
