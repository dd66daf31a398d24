#include "dtoda/geometry.hpp"

#include <cmath>

namespace dtoda {

namespace {

Eigen::MatrixXcd beta_matrix(const cvector& sigma, const cvector& gamma) {
    const int K = static_cast<int>(sigma.size());
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(K, K);
    for (int m = 0; m < K; ++m)
        for (int n = 0; n < K; ++n) {
            if (m == n) continue;
            const cplx diff = gamma[static_cast<std::size_t>(m)] - gamma[static_cast<std::size_t>(n)];
            B(m, n) = sigma[static_cast<std::size_t>(m)] * sigma[static_cast<std::size_t>(n)] *
                      gamma[static_cast<std::size_t>(m)] * gamma[static_cast<std::size_t>(n)] / (diff * diff);
        }
    return B;
}

cplx aligned_sqrt(cplx value, const cplx* ref) {
    // roundoff dirt just below the negative real axis would land on the
    // other sheet of the principal branch; snap near-real values onto the
    // axis so that real-negative inputs deterministically take the +i side
    if (std::abs(value.imag()) <= 1e-13 * std::abs(value)) value = cplx(value.real(), 0.0);
    cplx r = std::sqrt(value);
    if (ref && std::abs(r - *ref) > std::abs(-r - *ref)) r = -r;
    return r;
}

MetricFrame build(const LownerFrame& L, const MetricFrame* ref) {
    MetricFrame M;
    M.lowner = L;
    const int K = static_cast<int>(L.alpha.size());
    M.sigma.resize(static_cast<std::size_t>(K));
    M.sigma_tilde.resize(static_cast<std::size_t>(K));
    M.sigma_hat.resize(static_cast<std::size_t>(K));
    for (int n = 0; n < K; ++n) {
        const cplx a = L.alpha[static_cast<std::size_t>(n)];
        const cplx g = L.frame.gamma[static_cast<std::size_t>(n)];
        const cplx l = L.frame.lam[static_cast<std::size_t>(n)];
        // one root per index; the tilde and hat roots are derived from it so
        // that sigma_tilde/sigma = gamma and sigma_hat/sigma = sqrt(lambda)
        // hold exactly, not just up to sign
        const cplx s = aligned_sqrt(a / g, ref ? &ref->sigma[static_cast<std::size_t>(n)] : nullptr);
        cplx sl;
        if (ref) {
            const cplx rl = ref->sigma_hat[static_cast<std::size_t>(n)] / ref->sigma[static_cast<std::size_t>(n)];
            sl = aligned_sqrt(l, &rl);
        } else {
            sl = std::sqrt(l);
        }
        M.sigma[static_cast<std::size_t>(n)] = s;
        M.sigma_tilde[static_cast<std::size_t>(n)] = s * g;
        M.sigma_hat[static_cast<std::size_t>(n)] = s * sl;
    }
    M.beta = beta_matrix(M.sigma, L.frame.gamma);
    M.beta_hat = beta_matrix(M.sigma_hat, L.frame.gamma);
    return M;
}

}  // namespace

MetricFrame metric_frames(const LownerFrame& L) { return build(L, nullptr); }

MetricFrame metric_frames_aligned(const LownerFrame& L, const MetricFrame& ref) {
    return build(L, &ref);
}

RotationCheck rotation_check(const LGPotential& P, double h) {
    RotationCheck out;
    LambdaChart chart(P);
    const int K = chart.K();
    if (K < 2) return out;
    MetricFrame M = metric_frames(alpha_coeffs(chart.frame()));
    const double bscale = M.beta.cwiseAbs().maxCoeff();
    const double bhat_scale = M.beta_hat.cwiseAbs().maxCoeff();

    for (int m = 0; m < K; ++m) {
        const double step = chart.step_for(m, h);
        const InversionResult plus = chart.shifted(m, step);
        const InversionResult minus = chart.shifted(m, -step);
        const LownerFrame lp = alpha_coeffs(plus.frame);
        const LownerFrame lm = alpha_coeffs(minus.frame);
        // log-variable probes for the hat frame
        const InversionResult lplus = chart.shifted_log(m, h);
        const InversionResult lminus = chart.shifted_log(m, -h);
        const LownerFrame llp = alpha_coeffs(lplus.frame);
        const LownerFrame llm = alpha_coeffs(lminus.frame);
        for (int n = 0; n < K; ++n) {
            if (n == m) continue;
            auto f = [&](const LownerFrame& L) {
                return L.alpha[static_cast<std::size_t>(n)] / L.frame.gamma[static_cast<std::size_t>(n)];
            };
            auto ft = [&](const LownerFrame& L) {
                return L.alpha[static_cast<std::size_t>(n)] * L.frame.gamma[static_cast<std::size_t>(n)];
            };
            auto fh = [&](const LownerFrame& L) {
                return L.alpha[static_cast<std::size_t>(n)] * L.frame.lam[static_cast<std::size_t>(n)] /
                       L.frame.gamma[static_cast<std::size_t>(n)];
            };
            const cplx f0 = f(alpha_coeffs(chart.frame()));
            const cplx ft0 = ft(alpha_coeffs(chart.frame()));
            const cplx fh0 = fh(alpha_coeffs(chart.frame()));
            // branch-free d log sigma_n/d lambda_m = FD(sigma^2)/(2 sigma^2)
            const cplx dlog_sigma = (f(lp) - f(lm)) / (2.0 * step) / (2.0 * f0);
            const cplx dlog_sigma_t = (ft(lp) - ft(lm)) / (2.0 * step) / (2.0 * ft0);
            const cplx dlog_sigma_h = (fh(llp) - fh(llm)) / (2.0 * h) / (2.0 * fh0);
            const cplx bfd = M.sigma[static_cast<std::size_t>(n)] / M.sigma[static_cast<std::size_t>(m)] * dlog_sigma;
            const cplx bfd_t = M.sigma_tilde[static_cast<std::size_t>(n)] / M.sigma_tilde[static_cast<std::size_t>(m)] * dlog_sigma_t;
            const cplx bfd_h = M.sigma_hat[static_cast<std::size_t>(n)] / M.sigma_hat[static_cast<std::size_t>(m)] * dlog_sigma_h;
            out.h_frame = std::max(out.h_frame, std::abs(bfd - M.beta(m, n)) / bscale);
            out.htilde_frame = std::max(out.htilde_frame, std::abs(bfd_t - M.beta(m, n)) / bscale);
            out.hat_frame = std::max(out.hat_frame, std::abs(bfd_h - M.beta_hat(m, n)) / bhat_scale);
        }
    }
    return out;
}

GeometryResiduals geometry_residuals(const LGPotential& P, double h) {
    GeometryResiduals out;
    LambdaChart chart(P);
    const int K = chart.K();
    if (K < 2) return out;
    out.darboux_applicable = K >= 3;

    const MetricFrame M0 = metric_frames(alpha_coeffs(chart.frame()));
    const double bscale = M0.beta.cwiseAbs().maxCoeff();
    const double bhat_scale = M0.beta_hat.cwiseAbs().maxCoeff();

    // FD of the full beta matrices in each lambda_k (additive) and
    // log lambda_k (multiplicative), branch-aligned to the central frame.
    std::vector<Eigen::MatrixXcd> dbeta, dbeta_hat_log;
    std::vector<cvector> dh2;  // FD of h_n^2 = alpha_n/gamma_n per direction
    cvector dgamma_flat;       // FD of gamma_n per direction (K x K)
    dgamma_flat.resize(static_cast<std::size_t>(K * K));
    for (int k = 0; k < K; ++k) {
        const double step = chart.step_for(k, h);
        const InversionResult plus = chart.shifted(k, step);
        const InversionResult minus = chart.shifted(k, -step);
        const MetricFrame Mp = metric_frames_aligned(alpha_coeffs(plus.frame), M0);
        const MetricFrame Mm = metric_frames_aligned(alpha_coeffs(minus.frame), M0);
        dbeta.push_back((Mp.beta - Mm.beta) / (2.0 * step));
        cvector d2(static_cast<std::size_t>(K));
        for (int n = 0; n < K; ++n) {
            d2[static_cast<std::size_t>(n)] =
                (Mp.lowner.alpha[static_cast<std::size_t>(n)] / Mp.lowner.frame.gamma[static_cast<std::size_t>(n)] -
                 Mm.lowner.alpha[static_cast<std::size_t>(n)] / Mm.lowner.frame.gamma[static_cast<std::size_t>(n)]) /
                (2.0 * step);
            dgamma_flat[static_cast<std::size_t>(k * K + n)] =
                (Mp.lowner.frame.gamma[static_cast<std::size_t>(n)] -
                 Mm.lowner.frame.gamma[static_cast<std::size_t>(n)]) / (2.0 * step);
        }
        dh2.push_back(std::move(d2));

        const InversionResult lplus = chart.shifted_log(k, h);
        const InversionResult lminus = chart.shifted_log(k, -h);
        const MetricFrame Mlp = metric_frames_aligned(alpha_coeffs(lplus.frame), M0);
        const MetricFrame Mlm = metric_frames_aligned(alpha_coeffs(lminus.frame), M0);
        dbeta_hat_log.push_back((Mlp.beta_hat - Mlm.beta_hat) / (2.0 * h));
    }

    for (int m = 0; m < K; ++m) {
        for (int n = 0; n < K; ++n) {
            if (m == n) continue;
            // Darboux and log-Darboux over third indices
            for (int k = 0; k < K && out.darboux_applicable; ++k) {
                if (k == m || k == n) continue;
                out.darboux = std::max(out.darboux,
                    std::abs(dbeta[static_cast<std::size_t>(k)](m, n) - M0.beta(m, k) * M0.beta(k, n)) / bscale);
                // with one frozen root per index, sqrt(lambda_k)^2 = +lambda_k,
                // so the log-variable Darboux equations close with this sign:
                // d betahat_mn/d log lambda_k = betahat_mk betahat_kn
                out.log_darboux = std::max(out.log_darboux,
                    std::abs(dbeta_hat_log[static_cast<std::size_t>(k)](m, n) - M0.beta_hat(m, k) * M0.beta_hat(k, n)) / bhat_scale);
            }
            // Egorov cross-symmetry
            out.egorov = std::max(out.egorov,
                std::abs(dh2[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] -
                         dh2[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)]) /
                    std::max({std::abs(dh2[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)]),
                              std::abs(dh2[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)]), 1e-12}));
            // Combescure with w = gamma against d log h_n/d lambda_m
            const cplx gm = chart.frame().gamma[static_cast<std::size_t>(m)];
            const cplx gn = chart.frame().gamma[static_cast<std::size_t>(n)];
            const cplx h2n = chart.alpha()[static_cast<std::size_t>(n)] / gn;
            const cplx lhs = dgamma_flat[static_cast<std::size_t>(m * K + n)] / (gm - gn);
            const cplx rhs = dh2[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)] / (2.0 * h2n);
            out.combescure = std::max(out.combescure,
                std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12}));
            // flatness sum (reported) and hat homogeneity (asserted)
            cplx fsum = 0.0, hsum = 0.0;
            for (int k = 0; k < K; ++k) {
                fsum += dbeta[static_cast<std::size_t>(k)](m, n);
                hsum += dbeta_hat_log[static_cast<std::size_t>(k)](m, n);
            }
            out.flatness_sum = std::max(out.flatness_sum, std::abs(fsum));
            out.hat_homogeneity = std::max(out.hat_homogeneity, std::abs(hsum) / bhat_scale);
        }
    }
    return out;
}

}  // namespace dtoda
