#include "dtoda/lax.hpp"

#include <cmath>

namespace dtoda {

namespace {

// log(1 - a w) = -sum_{j>=1} (a w)^j / j as a series with `length` terms.
TruncatedSeries log_one_minus(Center center, cplx a, int length) {
    cvector c(static_cast<std::size_t>(std::max(length - 1, 1)), cplx(0.0, 0.0));
    cplx acc = a;
    for (int j = 1; j < length; ++j) {
        c[static_cast<std::size_t>(j - 1)] = -acc / static_cast<double>(j);
        acc *= a;
    }
    return TruncatedSeries(center, 1, std::move(c), false);
}

}  // namespace

cplx exp_Nphi(const LGPotential& P) {
    if (P.pcase == PotentialCase::II) return P.c.back();
    cplx prod = 1.0;
    for (int i = 0; i < P.M(); ++i)
        prod *= std::exp(P.kappa[static_cast<std::size_t>(i)] * std::log(-P.b[static_cast<std::size_t>(i)]));
    return prod;
}

namespace {

cplx phi_value(const LGPotential& P, const cplx* phi_ref) {
    const cplx E = exp_Nphi(P);
    const double N = static_cast<double>(P.N);
    if (!phi_ref) return std::log(E) / N;
    return *phi_ref + ratio_log(E, std::exp(N * *phi_ref)) / N;
}

}  // namespace

LaxExpansion expand_lax(const LGPotential& P, LaxSide side, int window,
                        const cplx* phi_ref) {
    if (window < 4) throw NumericalError("expand_lax: window too small (need >= 4)");
    const double mt = P.mtilde();
    LaxExpansion L;
    L.side = side;

    if (side == LaxSide::ZAtInfinity) {
        // z = p exp(S/Mtilde), S = sum kappa_i log(1 - b_i/p) [+ sum c_k p^{-k}]
        TruncatedSeries S = TruncatedSeries(Center::AtInfinity, window + 1, {}, false);
        for (int i = 0; i < P.M(); ++i)
            S = S + P.kappa[static_cast<std::size_t>(i)] *
                        log_one_minus(Center::AtInfinity, P.b[static_cast<std::size_t>(i)], window + 1);
        if (P.pcase == PotentialCase::II)
            for (int k = 1; k <= P.N; ++k)
                S = S + TruncatedSeries::monomial(Center::AtInfinity, -k, P.c[static_cast<std::size_t>(k - 1)])
                            .truncated_to(window + 1);
        TruncatedSeries E = s_exp(scale(S, 1.0 / mt), window);
        L.series = TruncatedSeries::monomial(Center::AtInfinity, 1, 1.0) * E;
        L.u1 = L.series.coeff_of_p(0);
        L.u2 = L.series.coeff_of_p(-1);
        return L;
    }

    const double N = static_cast<double>(P.N);
    L.phi = phi_value(P, phi_ref);
    const cplx ephi = std::exp(L.phi);
    if (P.pcase == PotentialCase::I) {
        // zbar = e^phi p^{-1} exp(T/N), T = sum kappa_i log(1 - p/b_i)
        TruncatedSeries T = TruncatedSeries(Center::AtZero, window + 1, {}, false);
        for (int i = 0; i < P.M(); ++i)
            T = T + P.kappa[static_cast<std::size_t>(i)] *
                        log_one_minus(Center::AtZero, 1.0 / P.b[static_cast<std::size_t>(i)], window + 1);
        TruncatedSeries E = s_exp(scale(T, 1.0 / N), window);
        L.series = ephi * (TruncatedSeries::monomial(Center::AtZero, -1, 1.0) * E);
    } else {
        // log lambda = c_N p^{-N} (1 + V); zbar = e^phi p^{-1} (1 + V)^{1/N}
        const cplx cN = P.c.back();
        cvector v(static_cast<std::size_t>(window), cplx(0.0, 0.0));
        v[0] = 1.0;
        for (int j = 1; j < window; ++j) {
            cplx coeff = 0.0;
            if (j < P.N) {
                coeff = P.c[static_cast<std::size_t>(P.N - j - 1)];
            } else if (j == P.N) {
                for (int i = 0; i < P.M(); ++i)
                    coeff += P.kappa[static_cast<std::size_t>(i)] * std::log(-P.b[static_cast<std::size_t>(i)]);
            } else {
                const int m = j - P.N;
                for (int i = 0; i < P.M(); ++i)
                    coeff -= P.kappa[static_cast<std::size_t>(i)] /
                             (static_cast<double>(m) * std::pow(P.b[static_cast<std::size_t>(i)], m));
            }
            v[static_cast<std::size_t>(j)] = coeff / cN;
        }
        TruncatedSeries onePlusV(Center::AtZero, 0, std::move(v), false);
        TruncatedSeries E = s_pow(onePlusV, 1.0 / N, window);
        L.series = ephi * (TruncatedSeries::monomial(Center::AtZero, -1, 1.0) * E);
    }
    L.u1 = L.series.coeff_of_p(0);
    L.u2 = L.series.coeff_of_p(1);
    return L;
}

TruncatedSeries generator(const LGPotential& P, LaxSide side, int n,
                          int window, const cplx* phi_ref) {
    if (n < 1) throw NumericalError("generator: flow index must be positive");
    const int W = window > 0 ? window : 2 * n + P.K() + 4;
    if (W < n + 2) throw NumericalError("generator: insufficient window");
    LaxExpansion L = expand_lax(P, side, W, phi_ref);
    TruncatedSeries zn = s_powi(L.series, n);
    auto [poly, neg] = split_parts(zn);
    if (side == LaxSide::ZAtInfinity) {
        // complement must be O(p^{-1})
        if (!neg.is_zero() && neg.lead() < 1)
            throw NumericalError("generator: complement of B_n is not O(1/p)");
        return poly;
    }
    if (!poly.is_zero() && poly.lead() < 0)
        throw NumericalError("generator: complement of Bbar_n is not O(1)");
    return neg;
}

TruncatedSeries generator_param_derivative(const LGPotential& P, LaxSide side,
                                           int n, int param_index, double fd_step) {
    Eigen::VectorXcd theta = pack_params(P);
    const double pscale = theta.cwiseAbs().maxCoeff();
    const double h = fd_step * std::max(std::abs(theta(param_index)), 0.1 * pscale);
    cplx phi_ref = 0.0;
    const cplx* ref = nullptr;
    if (side == LaxSide::ZbarAtZero) {
        phi_ref = expand_lax(P, side, std::max(n + P.K() + 4, 4)).phi;
        ref = &phi_ref;
    }
    Eigen::VectorXcd tp = theta, tm = theta;
    tp(param_index) += h;
    tm(param_index) -= h;
    TruncatedSeries Bp = generator(with_params(P, tp), side, n, -1, ref);
    TruncatedSeries Bm = generator(with_params(P, tm), side, n, -1, ref);
    return scale(sub(Bp, Bm), 1.0 / (2.0 * h));
}

EvolutionRHS evolution_rhs(const LGPotential& P, const cvector& db_ds,
                           const cvector& dc_ds, FlowIndex flow, double fd_step) {
    const int M = P.M();
    const int Nc = (P.pcase == PotentialCase::II) ? P.N : 0;
    if (static_cast<int>(db_ds.size()) != M)
        throw NumericalError("evolution_rhs: db_ds size mismatch");
    if (static_cast<int>(dc_ds.size()) != Nc)
        throw NumericalError("evolution_rhs: dc_ds size mismatch");

    const int n = flow.n;
    TruncatedSeries B = generator(P, flow.side, n);
    TruncatedSeries Bprime = B.derivative_p();

    // dB/ds by the chain rule through parameter derivatives of the coefficients
    TruncatedSeries dBds = TruncatedSeries::zero(B.center());
    for (int j = 0; j < P.K(); ++j) {
        const cplx dir = (j < M) ? db_ds[static_cast<std::size_t>(j)]
                                 : dc_ds[static_cast<std::size_t>(j - M)];
        if (dir == cplx(0.0, 0.0)) continue;
        dBds = dBds + dir * generator_param_derivative(P, flow.side, n, j, fd_step);
    }
    const bool dBds_zero = dBds.is_zero();

    // Bracket assembled at a given center:
    //   R = p (B' * dlog lambda/ds  -  dB/ds * dlog lambda/dp)
    auto bracket_at = [&](Center center, int length) {
        TruncatedSeries D = TruncatedSeries(center, length + n + 2, {}, false);
        for (int i = 0; i < M; ++i)
            D = D + (-P.kappa[static_cast<std::size_t>(i)] * db_ds[static_cast<std::size_t>(i)]) *
                        TruncatedSeries::pole_expansion(center, P.b[static_cast<std::size_t>(i)], length + n + 2);
        for (int k = 1; k <= Nc; ++k)
            D = D + TruncatedSeries::monomial(center, -k, dc_ds[static_cast<std::size_t>(k - 1)])
                        .truncated_to(D.upper());
        TruncatedSeries Lp = TruncatedSeries(center, length + n + 2, {}, false);
        for (int i = 0; i < M; ++i)
            Lp = Lp + P.kappa[static_cast<std::size_t>(i)] *
                          TruncatedSeries::pole_expansion(center, P.b[static_cast<std::size_t>(i)], length + n + 2);
        if (P.pcase == PotentialCase::I)
            Lp = Lp + TruncatedSeries::monomial(center, -1, -static_cast<double>(P.N)).truncated_to(Lp.upper());
        else
            for (int k = 1; k <= P.N; ++k)
                Lp = Lp + TruncatedSeries::monomial(center, -k - 1, -static_cast<double>(k) * P.c[static_cast<std::size_t>(k - 1)])
                              .truncated_to(Lp.upper());
        TruncatedSeries first = recenter_exact(Bprime, center) * D;
        TruncatedSeries second = dBds_zero ? TruncatedSeries::zero(center)
                                           : recenter_exact(dBds, center) * Lp;
        return TruncatedSeries::monomial(center, 1, 1.0) * (first - second);
    };

    EvolutionRHS out;
    out.F.assign(static_cast<std::size_t>(M), cplx(0.0, 0.0));
    for (int i = 0; i < M; ++i) {
        const cplx bi = P.b[static_cast<std::size_t>(i)];
        out.F[static_cast<std::size_t>(i)] =
            bi * (Bprime.eval_at(bi) * db_ds[static_cast<std::size_t>(i)] +
                  (dBds_zero ? cplx(0.0) : dBds.eval_at(bi)));
    }

    const int L0 = n + 2 * std::max(Nc, P.pcase == PotentialCase::I ? std::abs(P.N) : 0) + M + 8;
    TruncatedSeries R0 = bracket_at(Center::AtZero, L0);
    double rscale = std::max(max_abs(R0.coeffs()), 1e-300);
    out.G.assign(static_cast<std::size_t>(Nc), cplx(0.0, 0.0));
    for (int k = 1; k <= Nc; ++k) out.G[static_cast<std::size_t>(k - 1)] = R0.coeff_of_p(-k);
    double leak = 0.0;
    // coefficients of p^{-k} for k beyond N must cancel
    for (int j = 0; j < R0.window(); ++j) {
        const int k = R0.p_exponent(j);
        if (k < -Nc) leak = std::max(leak, std::abs(R0.coeffs()[static_cast<std::size_t>(j)]));
    }
    // polynomial part at infinity must cancel
    TruncatedSeries Rinf = bracket_at(Center::AtInfinity, n + M + Nc + 8);
    rscale = std::max(rscale, max_abs(Rinf.coeffs()));
    for (int j = 0; j < Rinf.window(); ++j)
        if (Rinf.p_exponent(j) >= 0)
            leak = std::max(leak, std::abs(Rinf.coeffs()[static_cast<std::size_t>(j)]));
    out.complement_residual = leak / rscale;
    if (out.complement_residual > 1e-6)
        throw NumericalError("evolution_rhs: nonvanishing polynomial remainder (window/derivative inconsistency)");
    return out;
}

}  // namespace dtoda
