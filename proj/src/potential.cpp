#include "dtoda/potential.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace dtoda {

double LGPotential::mtilde() const {
    double s = 0.0;
    for (double k : kappa) s += k;
    return pcase == PotentialCase::I ? s - static_cast<double>(N) : s;
}

LGPotential validate_potential(PotentialCase pcase, int N, std::vector<double> kappa,
                               cvector b, cvector c) {
    if (kappa.empty()) throw ValidationError("kappa must be nonempty");
    if (kappa.size() != b.size()) throw ValidationError("kappa and b must have equal length");
    for (double k : kappa)
        if (k == 0.0) throw ValidationError("kappa entries must be nonzero");
    double scale = max_abs(b);
    for (const cplx& z : b)
        if (std::abs(z) == 0.0) throw ValidationError("b entries must be nonzero");
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = i + 1; j < b.size(); ++j)
            if (std::abs(b[i] - b[j]) <= 1e-12 * scale)
                throw ValidationError("b entries must be pairwise distinct");
    if (pcase == PotentialCase::I) {
        if (N == 0) throw ValidationError("N must be nonzero");
        if (!c.empty()) throw ValidationError("c is only meaningful in Case II");
    } else {
        if (N <= 0) throw ValidationError("N must be positive");
        if (static_cast<int>(c.size()) != N) throw ValidationError("c must have N entries");
        if (std::abs(c.back()) == 0.0) throw ValidationError("c_N must be nonzero");
    }
    LGPotential P{pcase, N, std::move(kappa), std::move(b), std::move(c)};
    if (!(P.mtilde() > 0.0)) throw ValidationError("Mtilde must be positive");
    return P;
}

LogDerivatives log_derivatives(const LGPotential& P, cplx p) {
    const double scale = std::max(max_abs(P.b), std::abs(p));
    if (std::abs(p) <= 1e-14 * scale)
        throw NumericalError("log_derivatives evaluated at the pole p = 0");
    LogDerivatives d{0.0, 0.0, 0.0};
    for (int i = 0; i < P.M(); ++i) {
        const cplx dz = p - P.b[static_cast<std::size_t>(i)];
        if (std::abs(dz) <= 1e-14 * scale)
            throw NumericalError("log_derivatives evaluated at a zero b_i");
        const double k = P.kappa[static_cast<std::size_t>(i)];
        d.value += k * std::log(dz);
        d.first += k / dz;
        d.second -= k / (dz * dz);
    }
    if (P.pcase == PotentialCase::I) {
        const double N = P.N;
        d.value -= N * std::log(p);
        d.first -= N / p;
        d.second += N / (p * p);
    } else {
        cplx pk = p;  // p^k
        for (int k = 1; k <= P.N; ++k) {
            const cplx ck = P.c[static_cast<std::size_t>(k - 1)];
            d.value += ck / pk;
            d.first -= static_cast<double>(k) * ck / (pk * p);
            d.second += static_cast<double>(k * (k + 1)) * ck / (pk * p * p);
            pk *= p;
        }
    }
    return d;
}

cplx lambda_at(const LGPotential& P, cplx p) { return std::exp(log_derivatives(P, p).value); }

namespace {

// prod (p - b_i) over i != skip, ascending coefficients.
cvector zero_product(const cvector& b, int skip) {
    cvector poly{1.0};
    for (int i = 0; i < static_cast<int>(b.size()); ++i) {
        if (i == skip) continue;
        cvector next(poly.size() + 1, cplx(0.0, 0.0));
        for (std::size_t j = 0; j < poly.size(); ++j) {
            next[j + 1] += poly[j];
            next[j] -= b[static_cast<std::size_t>(i)] * poly[j];
        }
        poly = std::move(next);
    }
    return poly;
}

void axpy_shift(cvector& acc, const cvector& x, cplx a, int shift) {
    if (acc.size() < x.size() + static_cast<std::size_t>(shift))
        acc.resize(x.size() + static_cast<std::size_t>(shift), cplx(0.0, 0.0));
    for (std::size_t j = 0; j < x.size(); ++j) acc[j + static_cast<std::size_t>(shift)] += a * x[j];
}

cplx horner(const cvector& coeffs, cplx p) {
    cplx acc = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * p + coeffs[j];
    return acc;
}

cvector poly_derivative(const cvector& coeffs) {
    if (coeffs.size() <= 1) return {0.0};
    cvector d(coeffs.size() - 1);
    for (std::size_t j = 1; j < coeffs.size(); ++j) d[j - 1] = static_cast<double>(j) * coeffs[j];
    return d;
}

}  // namespace

cvector q_polynomial(const LGPotential& P) {
    cvector Q;
    if (P.pcase == PotentialCase::I) {
        // Q = -N prod(p-b) + sum_i kappa_i p prod_{j != i}(p-b_j)
        Q = zero_product(P.b, -1);
        for (cplx& z : Q) z *= -static_cast<double>(P.N);
        for (int i = 0; i < P.M(); ++i)
            axpy_shift(Q, zero_product(P.b, i), P.kappa[static_cast<std::size_t>(i)], 1);
    } else {
        // Q = sum_i kappa_i p^{N+1} prod_{j != i}(p-b_j) - (sum_k k c_k p^{N-k}) prod(p-b)
        for (int i = 0; i < P.M(); ++i)
            axpy_shift(Q, zero_product(P.b, i), P.kappa[static_cast<std::size_t>(i)], P.N + 1);
        const cvector full = zero_product(P.b, -1);
        for (int k = 1; k <= P.N; ++k)
            axpy_shift(Q, full, -static_cast<double>(k) * P.c[static_cast<std::size_t>(k - 1)], P.N - k);
    }
    while (Q.size() > 1 && std::abs(Q.back()) == 0.0) Q.pop_back();
    return Q;
}

cvector polynomial_roots(const cvector& coeffs) {
    const int deg = static_cast<int>(coeffs.size()) - 1;
    if (deg < 1) return {};
    if (std::abs(coeffs.back()) == 0.0)
        throw NumericalError("polynomial_roots: vanishing leading coefficient");
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    const cplx lead = coeffs.back();
    for (int j = 0; j < deg; ++j) C(j, deg - 1) = -coeffs[static_cast<std::size_t>(j)] / lead;
    for (int j = 1; j < deg; ++j) C(j, j - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    if (es.info() != Eigen::Success)
        throw NumericalError("polynomial_roots: eigenvalue iteration failed");
    cvector roots(static_cast<std::size_t>(deg));
    const cvector dcoeffs = poly_derivative(coeffs);
    for (int j = 0; j < deg; ++j) {
        cplx r = es.eigenvalues()(j);
        for (int it = 0; it < 3; ++it) {
            const cplx d = horner(dcoeffs, r);
            if (std::abs(d) == 0.0) break;
            r -= horner(coeffs, r) / d;
        }
        roots[static_cast<std::size_t>(j)] = r;
    }
    return roots;
}

namespace {

bool lex_less(cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

CriticalFrame frame_from_roots(const LGPotential& P, cvector gamma, cvector qcoeffs) {
    const int K = P.K();
    const double gscale = std::max(max_abs(gamma), 1e-300);
    double qnorm = max_abs(qcoeffs);
    double sep = std::numeric_limits<double>::infinity();
    for (int m = 0; m < K; ++m)
        for (int n = m + 1; n < K; ++n)
            sep = std::min(sep, std::abs(gamma[static_cast<std::size_t>(m)] - gamma[static_cast<std::size_t>(n)]));
    if (K >= 2 && sep <= 1e-8 * gscale)
        throw NumericalError("critical-point collision: distinct zeroes assumption violated");
    const double bscale = std::max(max_abs(P.b), gscale);
    for (const cplx& g : gamma) {
        if (std::abs(g) <= 1e-10 * bscale)
            throw NumericalError("critical point at the pole p = 0");
        for (const cplx& z : P.b)
            if (std::abs(g - z) <= 1e-10 * bscale)
                throw NumericalError("critical point collides with a zero b_i");
    }
    CriticalFrame F;
    F.gamma = std::move(gamma);
    F.qcoeffs = std::move(qcoeffs);
    F.separation = (K >= 2) ? sep : std::numeric_limits<double>::infinity();
    F.lam.resize(static_cast<std::size_t>(K));
    F.d2.resize(static_cast<std::size_t>(K));
    for (int n = 0; n < K; ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        const LogDerivatives d = log_derivatives(P, g);
        const cplx residual = horner(F.qcoeffs, g);
        if (std::abs(residual) > 1e-7 * std::max(qnorm, 1.0) * std::pow(std::max(1.0, std::abs(g)), static_cast<double>(F.qcoeffs.size() - 1)))
            throw NumericalError("critical point fails |Q(gamma)| <= tol");
        F.lam[static_cast<std::size_t>(n)] = std::exp(d.value);
        // lambda'' = lambda (log lambda)'' at a critical point
        F.d2[static_cast<std::size_t>(n)] = F.lam[static_cast<std::size_t>(n)] * d.second;
    }
    return F;
}

}  // namespace

CriticalFrame critical_frame(const LGPotential& P) {
    cvector Q = q_polynomial(P);
    cvector roots = polynomial_roots(Q);
    std::sort(roots.begin(), roots.end(), lex_less);
    return frame_from_roots(P, std::move(roots), std::move(Q));
}

std::vector<int> nearest_match(const cvector& source, const cvector& target) {
    const int n = static_cast<int>(source.size());
    if (static_cast<int>(target.size()) != n)
        throw NumericalError("nearest_match: size mismatch");
    std::vector<int> perm(static_cast<std::size_t>(n), -1);
    std::vector<bool> used_s(static_cast<std::size_t>(n), false), used_t(static_cast<std::size_t>(n), false);
    for (int pass = 0; pass < n; ++pass) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (used_s[static_cast<std::size_t>(i)]) continue;
            for (int j = 0; j < n; ++j) {
                if (used_t[static_cast<std::size_t>(j)]) continue;
                const double d = std::abs(source[static_cast<std::size_t>(i)] - target[static_cast<std::size_t>(j)]);
                if (d < best) { best = d; bi = i; bj = j; }
            }
        }
        perm[static_cast<std::size_t>(bi)] = bj;
        used_s[static_cast<std::size_t>(bi)] = true;
        used_t[static_cast<std::size_t>(bj)] = true;
    }
    return perm;
}

CriticalFrame critical_frame_matched(const LGPotential& P, const CriticalFrame& ref) {
    cvector Q = q_polynomial(P);
    cvector roots = polynomial_roots(Q);
    std::vector<int> perm = nearest_match(ref.gamma, roots);
    cvector ordered(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) ordered[i] = roots[static_cast<std::size_t>(perm[i])];
    return frame_from_roots(P, std::move(ordered), std::move(Q));
}

Eigen::MatrixXcd envelope_jacobian(const LGPotential& P, const CriticalFrame& F) {
    const int K = P.K();
    Eigen::MatrixXcd J(K, K);
    for (int n = 0; n < K; ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        const cplx ln = F.lam[static_cast<std::size_t>(n)];
        int col = 0;
        for (int i = 0; i < P.M(); ++i, ++col)
            J(n, col) = ln * (-P.kappa[static_cast<std::size_t>(i)] / (g - P.b[static_cast<std::size_t>(i)]));
        if (P.pcase == PotentialCase::II) {
            cplx gk = g;
            for (int k = 1; k <= P.N; ++k, ++col) {
                J(n, col) = ln / gk;
                gk *= g;
            }
        }
    }
    return J;
}

Eigen::VectorXcd pack_params(const LGPotential& P) {
    Eigen::VectorXcd v(P.K());
    int idx = 0;
    for (const cplx& z : P.b) v(idx++) = z;
    if (P.pcase == PotentialCase::II)
        for (const cplx& z : P.c) v(idx++) = z;
    return v;
}

LGPotential with_params(const LGPotential& tpl, const Eigen::VectorXcd& theta) {
    LGPotential P = tpl;
    int idx = 0;
    for (cplx& z : P.b) z = theta(idx++);
    if (P.pcase == PotentialCase::II)
        for (cplx& z : P.c) z = theta(idx++);
    return P;
}

InversionResult params_from_lambda(const LGPotential& tpl,
                                   const Eigen::VectorXcd& lambda_target,
                                   const LGPotential& guess,
                                   double tol, int max_iter) {
    const int K = tpl.K();
    if (lambda_target.size() != K)
        throw NumericalError("params_from_lambda: target size mismatch");
    const double lscale = std::max(lambda_target.cwiseAbs().maxCoeff(), 1e-300);
    for (int m = 0; m < K; ++m)
        for (int n = m + 1; n < K; ++n)
            if (std::abs(lambda_target(m) - lambda_target(n)) <= 1e-12 * lscale)
                throw NumericalError("params_from_lambda: coincident target critical values");

    CriticalFrame ref = critical_frame(guess);
    Eigen::VectorXcd theta = pack_params(guess);
    LGPotential P = guess;
    CriticalFrame F = ref;
    auto residual_of = [&](const CriticalFrame& fr) {
        Eigen::VectorXcd r(K);
        for (int n = 0; n < K; ++n) r(n) = lambda_target(n) - fr.lam[static_cast<std::size_t>(n)];
        return r;
    };
    Eigen::VectorXcd r = residual_of(F);
    double rnorm = r.cwiseAbs().maxCoeff();
    for (int it = 1; it <= max_iter; ++it) {
        if (rnorm <= tol * lscale)
            return {P, F, it - 1, rnorm};
        Eigen::MatrixXcd J = envelope_jacobian(P, F);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14))
            throw NumericalError("params_from_lambda: singular envelope Jacobian");
        Eigen::VectorXcd step = lu.solve(r);
        // damped update with step halving
        double factor = 1.0;
        for (int half = 0; half <= 6; ++half) {
            Eigen::VectorXcd theta_try = theta + factor * step;
            try {
                LGPotential Ptry = with_params(tpl, theta_try);
                CriticalFrame Ftry = critical_frame_matched(Ptry, ref);
                Eigen::VectorXcd rtry = residual_of(Ftry);
                const double rtry_norm = rtry.cwiseAbs().maxCoeff();
                if (rtry_norm < rnorm || factor < 1.0 / 32.0) {
                    theta = theta_try;
                    P = Ptry;
                    F = Ftry;
                    ref = F;  // track the moving frame
                    r = rtry;
                    rnorm = rtry_norm;
                    break;
                }
            } catch (const NumericalError&) {
                // fall through to a smaller step
            }
            factor *= 0.5;
            if (half == 6)
                throw NumericalError("params_from_lambda: step rejected repeatedly (frame invariant violation en route)");
        }
    }
    if (rnorm <= tol * lscale) return {P, F, max_iter, rnorm};
    throw NumericalError("params_from_lambda: Newton did not converge");
}

}  // namespace dtoda
