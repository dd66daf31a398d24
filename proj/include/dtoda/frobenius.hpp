#ifndef DTODA_FROBENIUS_HPP
#define DTODA_FROBENIUS_HPP

#include <string>

#include "dtoda/lax.hpp"
#include "dtoda/loewner.hpp"

namespace dtoda {

enum class Chart { Natural, Lambda, Flat };

// angle = <,> built from derivatives of lambda; round = (,) built from
// derivatives of log lambda.  Both are finite sums of residues at the
// critical points, evaluated by the simple-pole closed form.
enum class PairingForm { Angle, Round };

struct TangentVector {
    Chart chart = Chart::Natural;
    Eigen::VectorXcd components;
};

cplx pairing(const LGPotential& P, PairingForm form, const TangentVector& X,
             const TangentVector& Y);
cplx cubic(const LGPotential& P, PairingForm form, const TangentVector& X,
           const TangentVector& Y, const TangentVector& Z);

// Gram matrix of the chart basis under the form.
Eigen::MatrixXcd metric_matrix(const LGPotential& P, PairingForm form, Chart chart);

// Conversion of tangent-vector components between charts.
TangentVector convert(const LGPotential& P, const TangentVector& X, Chart target);

// Flat coordinate chart.
//   DZCaseI (kappa_i = 1, N >= 1):  q_n (n = 1..Mtilde-1), qbar_0 = phi,
//                                   qbar_n (n = 1..N), flat for the angle form.
//   CaseII:                         log-b axes oriented as log(1/b_i), then
//                                   qbar_0 = phi, qbar_n (n = 1..N-1), flat
//                                   for the round form.  The orientation of
//                                   the log-b axes is the one in which the
//                                   Gram matrix is the constant
//                                   [-kappa delta | -kappa delta_{n0} | N delta_{m+n,N}].
struct FlatChart {
    enum class Kind { DZCaseI, CaseII };
    Kind kind = Kind::DZCaseI;
    std::vector<std::string> labels;
    cvector values;
};

FlatChart flat_coordinates(const LGPotential& P);

// d(flat coordinate)/d(natural parameter) by central differences, with the
// phi branch pinned to the unperturbed value.
Eigen::MatrixXcd flat_jacobian(const LGPotential& P);

// Case II only: recover (c_1..c_N) from (qbar_0..qbar_{N-1}) at fixed b by
// Newton; the map is invertible by its triangular leading structure.
cvector case2_c_from_qbar(const LGPotential& tpl, const cvector& qbar_target,
                          const cvector& c_guess);

struct FlatMetricReport {
    FlatChart chart;
    Eigen::MatrixXcd matrix;    // metric in the flat chart at P
    Eigen::MatrixXcd expected;  // closed-form constants
    double max_error = 0.0;     // entrywise |matrix - expected|
    double constancy_deviation = 0.0;  // across random parameter points
};

FlatMetricReport flat_metric_report(const LGPotential& P, int sample_points = 5,
                                    unsigned seed = 7u);

struct ProductStructure {
    std::vector<Eigen::MatrixXcd> c;  // c[l](j,k): coefficients of d_j o d_k on d_l
    double associativity_residual = 0.0;
};

ProductStructure product_structure(const LGPotential& P, PairingForm form, Chart chart);

// Re-evaluation check of the Euler scaling: b -> rho b (Case I) or
// b -> rho b, c_k -> rho^k c_k (Case II) must send gamma_n -> rho gamma_n
// and lambda_n -> rho^Mtilde lambda_n.
struct EulerHomogeneity {
    double lam_residual = 0.0;
    double gamma_residual = 0.0;
    double max() const { return std::max(lam_residual, gamma_residual); }
};

EulerHomogeneity euler_homogeneity_residual(const LGPotential& P, double rho = 1.05);

}  // namespace dtoda

#endif
