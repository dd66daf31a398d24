#include "dtoda/sampling.hpp"

#include <cmath>

namespace dtoda {

namespace {

bool frame_well_conditioned(const LGPotential& P) {
    const CriticalFrame F = critical_frame(P);
    const int K = P.K();
    const double gscale = max_abs(F.gamma);
    if (F.separation < 0.08 * gscale) return false;
    const double lscale = max_abs(F.lam);
    for (int m = 0; m < K; ++m) {
        if (std::abs(F.lam[static_cast<std::size_t>(m)]) < 1e-3 * lscale) return false;
        for (int n = m + 1; n < K; ++n)
            if (std::abs(F.lam[static_cast<std::size_t>(m)] - F.lam[static_cast<std::size_t>(n)]) < 0.02 * lscale)
                return false;
    }
    // alphas within a sane dynamic range
    double amin = 1e300, amax = 0.0;
    for (int n = 0; n < K; ++n) {
        const cplx d = F.gamma[static_cast<std::size_t>(n)] * F.d2[static_cast<std::size_t>(n)];
        const double a = 1.0 / std::abs(d);
        amin = std::min(amin, a);
        amax = std::max(amax, a);
    }
    if (amax / amin > 1e4) return false;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(envelope_jacobian(P, F));
    return lu.rcond() > 1e-6;
}

}  // namespace

LGPotential random_model(std::mt19937& rng, PotentialCase pcase) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
    const double kappa_pool[] = {1.0, 1.0, 2.0, -1.0, 0.5, 1.5};

    for (int attempt = 0; attempt < 4096; ++attempt) {
        const int M = 2 + static_cast<int>(unit(rng) * 2.0);  // 2..3
        int N;
        std::vector<double> kappa;
        if (pcase == PotentialCase::I) {
            const int npool[] = {-2, -1, 1, 2};
            N = npool[static_cast<int>(unit(rng) * 4.0)];
            for (int i = 0; i < M; ++i) kappa.push_back(kappa_pool[static_cast<int>(unit(rng) * 6.0)]);
        } else {
            N = 1 + static_cast<int>(unit(rng) * 2.0);  // 1..2
            for (int i = 0; i < M; ++i) kappa.push_back(std::abs(kappa_pool[static_cast<int>(unit(rng) * 6.0)]));
        }
        cvector b;
        for (int i = 0; i < M; ++i)
            b.push_back(std::polar(0.7 + 1.6 * unit(rng), angle(rng)));
        bool separated = true;
        for (int i = 0; i < M && separated; ++i)
            for (int j = i + 1; j < M; ++j)
                if (std::abs(b[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]) < 0.5)
                    separated = false;
        if (!separated) continue;
        cvector c;
        if (pcase == PotentialCase::II)
            for (int k = 1; k <= N; ++k)
                c.push_back(std::polar(0.6 + 1.5 * unit(rng), angle(rng)));
        try {
            LGPotential P = validate_potential(pcase, N, kappa, b, c);
            if (frame_well_conditioned(P)) return P;
        } catch (const std::runtime_error&) {
            // invalid draw, resample
        }
    }
    throw NumericalError("random_model: sampling did not produce a well-conditioned model");
}

}  // namespace dtoda
