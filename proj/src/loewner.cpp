#include "dtoda/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dtoda {

LownerFrame alpha_coeffs(const CriticalFrame& F) {
    LownerFrame L;
    L.frame = F;
    const int K = static_cast<int>(F.gamma.size());
    L.alpha.resize(static_cast<std::size_t>(K));
    const double scale = max_abs(F.d2) * max_abs(F.gamma);
    for (int n = 0; n < K; ++n) {
        const cplx denom = F.gamma[static_cast<std::size_t>(n)] * F.d2[static_cast<std::size_t>(n)];
        if (std::abs(denom) <= 1e-14 * std::max(scale, 1e-300))
            throw NumericalError("alpha_coeffs: degenerate critical point (lambda'' vanishes)");
        L.alpha[static_cast<std::size_t>(n)] = 1.0 / denom;
    }
    return L;
}

LambdaChart::LambdaChart(const LGPotential& P, double newton_tol)
    : P_(P), frame_(critical_frame(P)), tol_(newton_tol) {
    alpha_ = alpha_coeffs(frame_).alpha;
    lscale_ = max_abs(frame_.lam);
}

double LambdaChart::step_for(int n, double h) const {
    return h * std::max(std::abs(frame_.lam[static_cast<std::size_t>(n)]), 0.1 * lscale_);
}

InversionResult LambdaChart::shifted(int n, cplx delta) const {
    Eigen::VectorXcd target(K());
    for (int m = 0; m < K(); ++m) target(m) = frame_.lam[static_cast<std::size_t>(m)];
    target(n) += delta;
    return params_from_lambda(P_, target, P_, tol_);
}

InversionResult LambdaChart::shifted_log(int n, cplx delta) const {
    Eigen::VectorXcd target(K());
    for (int m = 0; m < K(); ++m) target(m) = frame_.lam[static_cast<std::size_t>(m)];
    target(n) *= std::exp(delta);
    return params_from_lambda(P_, target, P_, tol_);
}

cplx dlog_lambda_between(const LGPotential& plus, const LGPotential& minus, cplx p) {
    cplx d = 0.0;
    for (int i = 0; i < plus.M(); ++i)
        d += plus.kappa[static_cast<std::size_t>(i)] *
             ratio_log(p - plus.b[static_cast<std::size_t>(i)], p - minus.b[static_cast<std::size_t>(i)]);
    if (plus.pcase == PotentialCase::II) {
        cplx pk = p;
        for (int k = 1; k <= plus.N; ++k) {
            d += (plus.c[static_cast<std::size_t>(k - 1)] - minus.c[static_cast<std::size_t>(k - 1)]) / pk;
            pk *= p;
        }
    }
    return d;
}

double loewner_residual(const LGPotential& P, const cvector& p_samples, double h) {
    LambdaChart chart(P);
    double worst = 0.0;
    for (int n = 0; n < chart.K(); ++n) {
        const double step = chart.step_for(n, h);
        const InversionResult plus = chart.shifted(n, step);
        const InversionResult minus = chart.shifted(n, -step);
        const cplx gamma_n = chart.frame().gamma[static_cast<std::size_t>(n)];
        const cplx alpha_n = chart.alpha()[static_cast<std::size_t>(n)];
        for (const cplx& p : p_samples) {
            const cplx fd = dlog_lambda_between(plus.P, minus.P, p) / (2.0 * step);
            const cplx rhs = alpha_n * p / (p - gamma_n) * log_derivatives(P, p).first;
            const double denom = std::max({std::abs(rhs), std::abs(fd), 1e-12});
            worst = std::max(worst, std::abs(fd - rhs) / denom);
        }
    }
    return worst;
}

cvector loewner_sample_points(const LGPotential& P, int count, unsigned seed) {
    const CriticalFrame F = critical_frame(P);
    const double scale = std::max(max_abs(F.gamma), max_abs(P.b));
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> radius(0.35, 2.2);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    cvector samples;
    double margin = 0.15;
    for (int attempt = 0; static_cast<int>(samples.size()) < count; ++attempt) {
        if (attempt > 0 && attempt % 4096 == 0) margin *= 0.5;  // crowded plane
        if (margin < 1e-6)
            throw NumericalError("loewner_sample_points: no room between singular points");
        const cplx p = std::polar(radius(rng) * scale, angle(rng));
        bool ok = std::abs(p) > margin * scale;
        for (const cplx& z : P.b) ok = ok && std::abs(p - z) > margin * scale;
        for (const cplx& g : F.gamma) ok = ok && std::abs(p - g) > margin * scale;
        if (ok) samples.push_back(p);
    }
    return samples;
}

double GTResiduals::max() const { return std::max({gamma, alpha, product, quotient}); }

GTResiduals gt_residual(const LGPotential& P, double h) {
    GTResiduals r;
    LambdaChart chart(P);
    const int K = chart.K();
    if (K < 2) return r;
    const auto& gam = chart.frame().gamma;
    const auto& alp = chart.alpha();

    // characteristic derivative scales: a quantity of magnitude q varying
    // over the lambda range has derivatives of order q/lscale, which is the
    // honest floor when an identity's both sides vanish (e.g. gamma_m = -gamma_n)
    const double lscale = std::max(chart.lambda_scale(), 1e-300);
    double gmag = 0.0, amag = 0.0, pmag = 0.0, qmag = 0.0;
    for (int n = 0; n < K; ++n) {
        gmag = std::max(gmag, std::abs(gam[static_cast<std::size_t>(n)]));
        amag = std::max(amag, std::abs(alp[static_cast<std::size_t>(n)]));
        pmag = std::max(pmag, std::abs(alp[static_cast<std::size_t>(n)] * gam[static_cast<std::size_t>(n)]));
        qmag = std::max(qmag, std::abs(alp[static_cast<std::size_t>(n)] / gam[static_cast<std::size_t>(n)]));
    }
    auto rel = [](cplx fd, cplx formula, double floor_mag) {
        const double denom = std::max({std::abs(formula), std::abs(fd), floor_mag, 1e-300});
        return std::abs(fd - formula) / denom;
    };

    for (int m = 0; m < K; ++m) {
        const double step = chart.step_for(m, h);
        const InversionResult plus = chart.shifted(m, step);
        const InversionResult minus = chart.shifted(m, -step);
        const LownerFrame ap = alpha_coeffs(plus.frame);
        const LownerFrame am = alpha_coeffs(minus.frame);
        for (int n = 0; n < K; ++n) {
            if (n == m) continue;
            const cplx gm = gam[static_cast<std::size_t>(m)], gn = gam[static_cast<std::size_t>(n)];
            const cplx al_m = alp[static_cast<std::size_t>(m)], al_n = alp[static_cast<std::size_t>(n)];
            const cplx dg = (plus.frame.gamma[static_cast<std::size_t>(n)] - minus.frame.gamma[static_cast<std::size_t>(n)]) / (2.0 * step);
            const cplx da = (ap.alpha[static_cast<std::size_t>(n)] - am.alpha[static_cast<std::size_t>(n)]) / (2.0 * step);
            const cplx dprod = (ap.alpha[static_cast<std::size_t>(n)] * plus.frame.gamma[static_cast<std::size_t>(n)] -
                                am.alpha[static_cast<std::size_t>(n)] * minus.frame.gamma[static_cast<std::size_t>(n)]) / (2.0 * step);
            const cplx dquot = (ap.alpha[static_cast<std::size_t>(n)] / plus.frame.gamma[static_cast<std::size_t>(n)] -
                                am.alpha[static_cast<std::size_t>(n)] / minus.frame.gamma[static_cast<std::size_t>(n)]) / (2.0 * step);
            const cplx diff = gm - gn;
            r.gamma = std::max(r.gamma, rel(dg, al_m * gn / diff, gmag / lscale));
            r.alpha = std::max(r.alpha, rel(da, al_m * al_n * (gm + gn) / (diff * diff), amag / lscale));
            r.product = std::max(r.product, rel(dprod, 2.0 * (al_m * gm) * (al_n * gn) / (diff * diff), pmag / lscale));
            r.quotient = std::max(r.quotient, rel(dquot, 2.0 * gm * gn / (diff * diff) * (al_m / gm) * (al_n / gn), qmag / lscale));
        }
    }
    return r;
}

double PotentialRelationResiduals::max() const { return std::max({u1, u2, phi}); }

PotentialRelationResiduals potential_relations_residual(const LGPotential& P, double h,
                                                        int window) {
    PotentialRelationResiduals r;
    LambdaChart chart(P);
    const int K = chart.K();
    const int W = window > 0 ? std::max(window, 4) : P.K() + 6;
    const double N = static_cast<double>(P.N);
    double amag = max_abs(chart.alpha());
    for (int n = 0; n < K; ++n) {
        const double step = chart.step_for(n, h);
        const InversionResult plus = chart.shifted(n, step);
        const InversionResult minus = chart.shifted(n, -step);
        const LaxExpansion zp = expand_lax(plus.P, LaxSide::ZAtInfinity, W);
        const LaxExpansion zm = expand_lax(minus.P, LaxSide::ZAtInfinity, W);
        const cplx du1 = (zp.u1 - zm.u1) / (2.0 * step);
        const cplx du2 = (zp.u2 - zm.u2) / (2.0 * step);
        // dphi through e^{N phi}: branch-free quotient log
        const cplx dphi = ratio_log(exp_Nphi(plus.P), exp_Nphi(minus.P)) / (N * 2.0 * step);
        const cplx a = chart.alpha()[static_cast<std::size_t>(n)];
        const cplx g = chart.frame().gamma[static_cast<std::size_t>(n)];
        auto rel = [&](cplx fd, cplx formula) {
            return std::abs(fd - formula) / std::max({std::abs(formula), std::abs(fd), 1e-9 * amag});
        };
        r.u1 = std::max(r.u1, rel(du1, a));
        r.u2 = std::max(r.u2, rel(du2, a * g));
        r.phi = std::max(r.phi, rel(dphi, a / g));
    }
    return r;
}

}  // namespace dtoda
