#ifndef DTODA_GEOMETRY_HPP
#define DTODA_GEOMETRY_HPP

#include "dtoda/loewner.hpp"

namespace dtoda {

// Lame coefficients of the three Egorov metrics and their rotation
// coefficients.  One square root is chosen per index and frozen, so every
// pairwise identity below is exact rather than "up to sign":
//   h_n    = sigma_n       = sqrt(alpha_n/gamma_n)
//   htilde = sigma_tilde_n = sqrt(alpha_n gamma_n)
//   hhat   = sigma_hat_n   = sqrt(alpha_n lambda_n/gamma_n)   (log-lambda frame)
struct MetricFrame {
    cvector sigma;
    cvector sigma_tilde;
    cvector sigma_hat;
    Eigen::MatrixXcd beta;      // sigma_m sigma_n gamma_m gamma_n/(gamma_m-gamma_n)^2
    Eigen::MatrixXcd beta_hat;  // same with sigma_hat in place of sigma
    LownerFrame lowner;
};

MetricFrame metric_frames(const LownerFrame& L);
// Square-root branches chosen nearest to ref's, for smooth FD probes.
MetricFrame metric_frames_aligned(const LownerFrame& L, const MetricFrame& ref);

// |beta_formula - beta_FD| with the branch-free logarithmic derivative,
// for the h-frame, the htilde-frame (which must give the same beta) and
// the log-variable hhat-frame.
struct RotationCheck {
    double h_frame = 0.0;
    double htilde_frame = 0.0;
    double hat_frame = 0.0;
    double max() const { return std::max({h_frame, htilde_frame, hat_frame}); }
};

RotationCheck rotation_check(const LGPotential& P, double h);

struct GeometryResiduals {
    bool darboux_applicable = false;  // needs K >= 3
    double darboux = 0.0;             // d beta_mn/d lambda_k = beta_mk beta_kn
    // log-variable Darboux equations for betahat.  With one frozen root per
    // index (sqrt(lambda_k)^2 = +lambda_k) the closed form is
    // d betahat_mn/d log lambda_k = betahat_mk betahat_kn; a per-pair root
    // convention flips the sign of the product term.
    double log_darboux = 0.0;
    double egorov = 0.0;              // d(h_n^2)/d lambda_m = d(h_m^2)/d lambda_n
    double combescure = 0.0;          // with w_n = gamma_n against d log h_n/d lambda_m
    double flatness_sum = 0.0;        // sum_k d beta_mn/d lambda_k — reported, not asserted
    double hat_homogeneity = 0.0;     // sum_k lambda_k d betahat_mn/d lambda_k = 0
};

// All residuals need K >= 2; the Darboux entry needs K >= 3 and is marked
// not applicable otherwise.
GeometryResiduals geometry_residuals(const LGPotential& P, double h);

}  // namespace dtoda

#endif
