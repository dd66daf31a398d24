#ifndef DTODA_HYDRO_HPP
#define DTODA_HYDRO_HPP

#include <map>
#include <string>

#include "dtoda/lax.hpp"
#include "dtoda/loewner.hpp"
#include "dtoda/potential.hpp"

namespace dtoda {

// A point in the space of the hierarchy variables (s, t_k, tbar_k); only
// finitely many times are nonzero.
struct SpaceTimePoint {
    double s = 0.0;
    std::map<int, double> t;
    std::map<int, double> tbar;
};

// Hodograph data F_n = a0 + sum_k a_k V_kn + sum_k abar_k Vbar_kn —
// constants plus linear combinations of characteristic speeds, the obvious
// solutions of the speed equations.
struct HodographData {
    cplx a0{0.0};
    std::map<int, cplx> a;
    std::map<int, cplx> abar;

    bool has_speed_terms() const { return !a.empty() || !abar.empty(); }
};

// V_kn = gamma_n B_k'(gamma_n) (t-flows) or gamma_n Bbar_k'(gamma_n)
// (tbar-flows), evaluated on the given frame.  phi_ref pins the zbar branch
// for finite-difference probes.
cvector speeds(const LGPotential& P, const CriticalFrame& F, FlowIndex flow,
               const cplx* phi_ref = nullptr);

cvector hodograph_F(const LGPotential& P, const CriticalFrame& F,
                    const HodographData& data, const cplx* phi_ref = nullptr);

// r_n = s + sum t_k V_kn + sum tbar_k Vbar_kn - F_n
cvector hodograph_residual(const LGPotential& P, const CriticalFrame& F,
                           const SpaceTimePoint& pt, const HodographData& data,
                           const cplx* phi_ref = nullptr);

struct HodographSolution {
    LGPotential P;
    CriticalFrame frame;
    Eigen::VectorXcd lambda;
    int iters = 0;
    double residual = 0.0;
};

// Damped Newton on the critical values lambda_n (the Riemann invariants),
// round-tripping through params_from_lambda each step.  Verifies the
// non-degeneracy condition (nonsingular Jacobian) even when the initial
// residual already vanishes.
HodographSolution hodograph_solve(const LGPotential& tpl, const SpaceTimePoint& pt,
                                  const HodographData& data, const LGPotential& guess,
                                  double tol = 1e-12, int max_iter = 40);

// Solves a small linear system for (a0, listed coefficients) so that `ref`
// is an exact solution at `anchor`.
HodographData make_seed_data(const LGPotential& ref, const SpaceTimePoint& anchor,
                             const std::vector<FlowIndex>& active_terms);

// Structured grid: axis names are "s", "t<k>" or "tbar<k>"; nodes are
// enumerated row-major with the last axis fastest.
struct GridAxis {
    std::string name;
    std::vector<double> values;
};

struct Grid {
    std::vector<GridAxis> axes;

    std::size_t size() const;
    SpaceTimePoint point(std::size_t flat) const;
    std::vector<std::size_t> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::vector<std::size_t>& idx) const;
    int axis_index(const std::string& name) const;  // -1 if absent
};

// Fills an axis slot on a SpaceTimePoint from its name.
void apply_axis(SpaceTimePoint& pt, const std::string& name, double value);

struct SolutionField {
    Grid grid;
    HodographData data;
    std::vector<HodographSolution> nodes;  // grid order
};

// Continuation over the grid with nearest-frame matching; the guess for a
// node is its predecessor's solution, with automatic step halving (up to 6)
// along the segment on Newton failure.
SolutionField hodograph_sweep(const LGPotential& tpl, const Grid& grid,
                              const HodographData& data, const LGPotential& seed,
                              double tol = 1e-12);

// Max relative residual of d lambda_n/dt_k = V_kn d lambda_n/ds over
// interior grid nodes (central differences).
double pde_residual(const SolutionField& field, FlowIndex flow);

// Max relative residual of d log lambda(p)/dt_k = {B_k, log lambda}(p)
// with s-derivatives taken from the field.
double lax_flow_residual(const SolutionField& field, FlowIndex flow,
                         const cvector& p_samples);

struct SpeedStructureResiduals {
    double V = 0.0;
    double Vbar = 0.0;
    double F = 0.0;  // 0 when no data supplied
    double max() const { return std::max({V, Vbar, F}); }
};

// FD verification of the speed equations
//   dV_kn/dlambda_m = (V_km - V_kn) alpha_m gamma_n/(gamma_m-gamma_n)^2
// and of the same equation for hodograph data F.
SpeedStructureResiduals speed_structure_residual(const LGPotential& P, int k, double h,
                                                 const HodographData* data = nullptr);

}  // namespace dtoda

#endif
