#include "dtoda/frobenius.hpp"

#include <cmath>
#include <random>

namespace dtoda {

namespace {

// Slot values of the natural basis at the critical points:
// S(j, n) = d log lambda/d theta_j evaluated at gamma_n.
Eigen::MatrixXcd natural_slots(const LGPotential& P, const CriticalFrame& F) {
    const int K = P.K();
    Eigen::MatrixXcd S(K, K);
    for (int n = 0; n < K; ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        int row = 0;
        for (int i = 0; i < P.M(); ++i, ++row)
            S(row, n) = -P.kappa[static_cast<std::size_t>(i)] / (g - P.b[static_cast<std::size_t>(i)]);
        if (P.pcase == PotentialCase::II) {
            cplx gk = g;
            for (int k = 1; k <= P.N; ++k, ++row) {
                S(row, n) = 1.0 / gk;
                gk *= g;
            }
        }
    }
    return S;
}

struct ResidueData {
    CriticalFrame frame;
    cvector alpha;
    Eigen::MatrixXcd slots;   // natural-basis slot values (K x K)
    cvector weights_angle;    // alpha_n/gamma_n
    cvector weights_round;    // lambda_n alpha_n/gamma_n
};

ResidueData residue_data(const LGPotential& P) {
    ResidueData D;
    D.frame = critical_frame(P);
    D.alpha = alpha_coeffs(D.frame).alpha;
    D.slots = natural_slots(P, D.frame);
    const int K = P.K();
    D.weights_angle.resize(static_cast<std::size_t>(K));
    D.weights_round.resize(static_cast<std::size_t>(K));
    for (int n = 0; n < K; ++n) {
        const cplx w = D.alpha[static_cast<std::size_t>(n)] / D.frame.gamma[static_cast<std::size_t>(n)];
        D.weights_angle[static_cast<std::size_t>(n)] = w;
        D.weights_round[static_cast<std::size_t>(n)] = w * D.frame.lam[static_cast<std::size_t>(n)];
    }
    return D;
}

void require_form_available(const LGPotential& P, PairingForm form) {
    if (form == PairingForm::Angle && P.pcase == PotentialCase::II)
        throw ValidationError(
            "angle pairing is unavailable for Case II: the defining 1-forms have an "
            "essential singularity at p = 0 and the residue theorem does not apply");
}

// Natural components of a vector given in any chart.
Eigen::VectorXcd natural_components(const LGPotential& P, const TangentVector& X) {
    switch (X.chart) {
        case Chart::Natural:
            return X.components;
        case Chart::Lambda: {
            const CriticalFrame F = critical_frame(P);
            Eigen::MatrixXcd J = envelope_jacobian(P, F);  // d lambda / d theta
            return J.partialPivLu().solve(X.components);
        }
        case Chart::Flat: {
            Eigen::MatrixXcd Jf = flat_jacobian(P);  // d flat / d theta
            return Jf.partialPivLu().solve(X.components);
        }
    }
    throw NumericalError("unknown chart");
}

// Per-critical-point slot values of a natural-components vector.
cvector slot_values(const ResidueData& D, PairingForm form, const Eigen::VectorXcd& nat) {
    const int K = static_cast<int>(D.frame.gamma.size());
    cvector out(static_cast<std::size_t>(K));
    for (int n = 0; n < K; ++n) {
        cplx v = 0.0;
        for (int j = 0; j < K; ++j) v += nat(j) * D.slots(j, n);
        // the angle form pairs derivatives of lambda rather than log lambda
        if (form == PairingForm::Angle) v *= D.frame.lam[static_cast<std::size_t>(n)];
        out[static_cast<std::size_t>(n)] = v;
    }
    return out;
}

}  // namespace

cplx pairing(const LGPotential& P, PairingForm form, const TangentVector& X,
             const TangentVector& Y) {
    require_form_available(P, form);
    const ResidueData D = residue_data(P);
    const cvector xv = slot_values(D, form, natural_components(P, X));
    const cvector yv = slot_values(D, form, natural_components(P, Y));
    const cvector& w = (form == PairingForm::Angle) ? D.weights_angle : D.weights_round;
    cplx acc = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) acc += xv[n] * yv[n] * w[n];
    return acc;
}

cplx cubic(const LGPotential& P, PairingForm form, const TangentVector& X,
           const TangentVector& Y, const TangentVector& Z) {
    require_form_available(P, form);
    const ResidueData D = residue_data(P);
    const cvector xv = slot_values(D, form, natural_components(P, X));
    const cvector yv = slot_values(D, form, natural_components(P, Y));
    const cvector zv = slot_values(D, form, natural_components(P, Z));
    // same residue weights as the pairing; the third slot carries the extra
    // derivative factor
    const cvector& w = (form == PairingForm::Angle) ? D.weights_angle : D.weights_round;
    cplx acc = 0.0;
    for (std::size_t n = 0; n < xv.size(); ++n) acc += xv[n] * yv[n] * zv[n] * w[n];
    return acc;
}

TangentVector convert(const LGPotential& P, const TangentVector& X, Chart target) {
    if (X.chart == target) return X;
    const Eigen::VectorXcd nat = natural_components(P, X);
    TangentVector out;
    out.chart = target;
    switch (target) {
        case Chart::Natural:
            out.components = nat;
            break;
        case Chart::Lambda: {
            const CriticalFrame F = critical_frame(P);
            out.components = envelope_jacobian(P, F) * nat;
            break;
        }
        case Chart::Flat:
            out.components = flat_jacobian(P) * nat;
            break;
    }
    return out;
}

namespace {

Eigen::MatrixXcd chart_basis_slots(const LGPotential& P, const ResidueData& D,
                                   PairingForm form, Chart chart) {
    const int K = P.K();
    Eigen::MatrixXcd nat(K, K);  // column a = natural components of basis vector a
    switch (chart) {
        case Chart::Natural:
            nat = Eigen::MatrixXcd::Identity(K, K);
            break;
        case Chart::Lambda:
            nat = envelope_jacobian(P, D.frame).partialPivLu().inverse();
            break;
        case Chart::Flat:
            nat = flat_jacobian(P).partialPivLu().inverse();
            break;
    }
    Eigen::MatrixXcd S(K, K);  // S(a, n) = slot value of basis vector a at gamma_n
    for (int a = 0; a < K; ++a) {
        const cvector v = slot_values(D, form, nat.col(a));
        for (int n = 0; n < K; ++n) S(a, n) = v[static_cast<std::size_t>(n)];
    }
    return S;
}

}  // namespace

Eigen::MatrixXcd metric_matrix(const LGPotential& P, PairingForm form, Chart chart) {
    require_form_available(P, form);
    const ResidueData D = residue_data(P);
    const Eigen::MatrixXcd S = chart_basis_slots(P, D, form, chart);
    const cvector& w = (form == PairingForm::Angle) ? D.weights_angle : D.weights_round;
    const int K = P.K();
    Eigen::MatrixXcd G(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) {
            cplx acc = 0.0;
            for (int n = 0; n < K; ++n) acc += S(a, n) * S(b, n) * w[static_cast<std::size_t>(n)];
            G(a, b) = acc;
        }
    return G;
}

namespace {

bool is_dz_subfamily(const LGPotential& P) {
    if (P.pcase != PotentialCase::I || P.N < 1) return false;
    for (double k : P.kappa)
        if (k != 1.0) return false;
    return true;
}

// qbar_n = (1/n) [p^0] zbar^n for n = 1..count, with the zbar branch pinned
// by phi_ref when given.
cvector qbar_values(const LGPotential& P, int count, const cplx* phi_ref) {
    const int W = count + P.K() + 6;
    const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W, phi_ref);
    cvector out(static_cast<std::size_t>(count));
    TruncatedSeries power = TruncatedSeries::monomial(Center::AtZero, 0, 1.0).truncated_to(W);
    for (int n = 1; n <= count; ++n) {
        power = power * zb.series;
        out[static_cast<std::size_t>(n - 1)] = power.coeff_of_p(0) / static_cast<double>(n);
    }
    return out;
}

// q_n = -(1/n) [p^0] z^n (residue-at-infinity sign convention).
cvector q_values(const LGPotential& P, int count) {
    const int W = count + P.K() + 6;
    const LaxExpansion z = expand_lax(P, LaxSide::ZAtInfinity, W);
    cvector out(static_cast<std::size_t>(count));
    TruncatedSeries power = TruncatedSeries::monomial(Center::AtInfinity, 0, 1.0).truncated_to(W);
    for (int n = 1; n <= count; ++n) {
        power = power * z.series;
        out[static_cast<std::size_t>(n - 1)] = -power.coeff_of_p(0) / static_cast<double>(n);
    }
    return out;
}

cvector flat_values(const LGPotential& P, FlatChart::Kind kind, const cplx* phi_ref) {
    cvector vals;
    if (kind == FlatChart::Kind::DZCaseI) {
        const int mt = static_cast<int>(std::lround(P.mtilde()));
        const cvector q = q_values(P, std::max(mt - 1, 0));
        vals.insert(vals.end(), q.begin(), q.end());
        const cplx phi = phi_ref
                             ? *phi_ref + ratio_log(exp_Nphi(P), std::exp(static_cast<double>(P.N) * *phi_ref)) /
                                              static_cast<double>(P.N)
                             : std::log(exp_Nphi(P)) / static_cast<double>(P.N);
        vals.push_back(phi);
        const cvector qb = qbar_values(P, P.N, phi_ref);
        vals.insert(vals.end(), qb.begin(), qb.end());
        return vals;
    }
    // the log-b axes are oriented as log(1/b_i); in this orientation the
    // Gram matrix of the chart takes the constant form with cross entries
    // -kappa_i (the opposite orientation flips their sign)
    for (const cplx& bi : P.b) vals.push_back(-std::log(bi));
    const cplx phi = phi_ref ? *phi_ref + ratio_log(exp_Nphi(P), std::exp(static_cast<double>(P.N) * *phi_ref)) /
                                              static_cast<double>(P.N)
                             : std::log(exp_Nphi(P)) / static_cast<double>(P.N);
    vals.push_back(phi);
    if (P.N > 1) {
        const cvector qb = qbar_values(P, P.N - 1, phi_ref);
        vals.insert(vals.end(), qb.begin(), qb.end());
    }
    return vals;
}

FlatChart::Kind flat_kind_for(const LGPotential& P) {
    if (P.pcase == PotentialCase::II) return FlatChart::Kind::CaseII;
    if (!is_dz_subfamily(P))
        throw ValidationError(
            "flat chart unavailable: the construction requires kappa_i = 1 and N >= 1; "
            "the angle metric is likely no longer flat in other cases");
    return FlatChart::Kind::DZCaseI;
}

}  // namespace

FlatChart flat_coordinates(const LGPotential& P) {
    FlatChart chart;
    chart.kind = flat_kind_for(P);
    chart.values = flat_values(P, chart.kind, nullptr);
    if (chart.kind == FlatChart::Kind::DZCaseI) {
        const int mt = static_cast<int>(std::lround(P.mtilde()));
        for (int n = 1; n <= mt - 1; ++n) chart.labels.push_back("q" + std::to_string(n));
        for (int n = 0; n <= P.N; ++n) chart.labels.push_back("qbar" + std::to_string(n));
    } else {
        for (int i = 1; i <= P.M(); ++i) chart.labels.push_back("logb" + std::to_string(i));
        for (int n = 0; n <= P.N - 1; ++n) chart.labels.push_back("qbar" + std::to_string(n));
    }
    if (static_cast<int>(chart.values.size()) != P.K())
        throw NumericalError("flat chart dimension mismatch");
    return chart;
}

Eigen::MatrixXcd flat_jacobian(const LGPotential& P) {
    const FlatChart::Kind kind = flat_kind_for(P);
    const int K = P.K();
    const Eigen::VectorXcd theta = pack_params(P);
    const double scale = theta.cwiseAbs().maxCoeff();
    const cplx phi0 = std::log(exp_Nphi(P)) / static_cast<double>(P.N);
    Eigen::MatrixXcd J(K, K);
    for (int j = 0; j < K; ++j) {
        const double h = 1e-6 * std::max(std::abs(theta(j)), 0.1 * scale);
        Eigen::VectorXcd tp = theta, tm = theta;
        tp(j) += h;
        tm(j) -= h;
        const cvector vp = flat_values(with_params(P, tp), kind, &phi0);
        const cvector vm = flat_values(with_params(P, tm), kind, &phi0);
        for (int a = 0; a < K; ++a)
            J(a, j) = (vp[static_cast<std::size_t>(a)] - vm[static_cast<std::size_t>(a)]) / (2.0 * h);
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
    if (!(lu.rcond() > 1e-12))
        throw NumericalError("flat chart Jacobian is singular");
    return J;
}

cvector case2_c_from_qbar(const LGPotential& tpl, const cvector& qbar_target,
                          const cvector& c_guess) {
    if (tpl.pcase != PotentialCase::II)
        throw NumericalError("case2_c_from_qbar requires a Case II potential");
    const int N = tpl.N;
    if (static_cast<int>(qbar_target.size()) != N || static_cast<int>(c_guess.size()) != N)
        throw NumericalError("case2_c_from_qbar: size mismatch");
    LGPotential P = tpl;
    P.c = c_guess;
    cplx phi0 = std::log(exp_Nphi(P)) / static_cast<double>(N);

    auto values = [&](const LGPotential& Q) {
        cvector v;
        v.push_back(phi0 + ratio_log(exp_Nphi(Q), std::exp(static_cast<double>(N) * phi0)) /
                               static_cast<double>(N));
        if (N > 1) {
            const cvector qb = qbar_values(Q, N - 1, &phi0);
            v.insert(v.end(), qb.begin(), qb.end());
        }
        return v;
    };

    const double qscale = std::max(max_abs(qbar_target), 1.0);
    for (int it = 0; it < 60; ++it) {
        const cvector v = values(P);
        Eigen::VectorXcd r(N);
        for (int n = 0; n < N; ++n) r(n) = qbar_target[static_cast<std::size_t>(n)] - v[static_cast<std::size_t>(n)];
        if (r.cwiseAbs().maxCoeff() <= 1e-12 * qscale) return P.c;
        const double cscale = max_abs(P.c);
        Eigen::MatrixXcd J(N, N);
        for (int k = 0; k < N; ++k) {
            const double h = 1e-6 * std::max(std::abs(P.c[static_cast<std::size_t>(k)]), 0.1 * cscale);
            LGPotential Pp = P, Pm = P;
            Pp.c[static_cast<std::size_t>(k)] += h;
            Pm.c[static_cast<std::size_t>(k)] -= h;
            const cvector vp = values(Pp), vm = values(Pm);
            for (int n = 0; n < N; ++n)
                J(n, k) = (vp[static_cast<std::size_t>(n)] - vm[static_cast<std::size_t>(n)]) / (2.0 * h);
        }
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
        if (!(lu.rcond() > 1e-13))
            throw NumericalError("case2_c_from_qbar: singular Jacobian");
        const Eigen::VectorXcd step = lu.solve(r);
        for (int k = 0; k < N; ++k) P.c[static_cast<std::size_t>(k)] += step(k);
        if (std::abs(P.c.back()) == 0.0)
            throw NumericalError("case2_c_from_qbar: c_N hit zero");
    }
    throw NumericalError("case2_c_from_qbar: Newton did not converge");
}

namespace {

Eigen::MatrixXcd expected_flat_matrix(const LGPotential& P, const FlatChart& chart) {
    const int K = P.K();
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(K, K);
    if (chart.kind == FlatChart::Kind::DZCaseI) {
        const int mt = static_cast<int>(std::lround(P.mtilde()));
        const int nq = mt - 1;
        for (int m = 1; m <= nq; ++m)
            for (int n = 1; n <= nq; ++n)
                if (m + n == mt) E(m - 1, n - 1) = static_cast<double>(mt);
        for (int m = 0; m <= P.N; ++m)
            for (int n = 0; n <= P.N; ++n)
                if (m + n == P.N) E(nq + m, nq + n) = static_cast<double>(P.N);
        return E;
    }
    const int M = P.M();
    for (int i = 0; i < M; ++i) {
        E(i, i) = -P.kappa[static_cast<std::size_t>(i)];
        E(i, M) = E(M, i) = -P.kappa[static_cast<std::size_t>(i)];  // (log b_i, qbar_0)
    }
    for (int m = 0; m <= P.N - 1; ++m)
        for (int n = 0; n <= P.N - 1; ++n)
            if (m + n == P.N) E(M + m, M + n) = static_cast<double>(P.N);
    return E;
}

}  // namespace

FlatMetricReport flat_metric_report(const LGPotential& P, int sample_points, unsigned seed) {
    FlatMetricReport rep;
    rep.chart = flat_coordinates(P);
    const PairingForm form =
        rep.chart.kind == FlatChart::Kind::DZCaseI ? PairingForm::Angle : PairingForm::Round;
    rep.matrix = metric_matrix(P, form, Chart::Flat);
    rep.expected = expected_flat_matrix(P, rep.chart);
    rep.max_error = (rep.matrix - rep.expected).cwiseAbs().maxCoeff();

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> mag(-0.25, 0.25);
    for (int trial = 0; trial < sample_points; ++trial) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            LGPotential Q = P;
            for (cplx& z : Q.b) z *= cplx(1.0 + mag(rng), mag(rng));
            for (cplx& z : Q.c) z *= cplx(1.0 + mag(rng), mag(rng));
            try {
                validate_potential(Q.pcase, Q.N, Q.kappa, Q.b, Q.c);
                const Eigen::MatrixXcd G = metric_matrix(Q, form, Chart::Flat);
                rep.constancy_deviation =
                    std::max(rep.constancy_deviation, (G - rep.matrix).cwiseAbs().maxCoeff());
                break;
            } catch (const std::runtime_error&) {
                // resample degenerate perturbations
            }
        }
    }
    return rep;
}

ProductStructure product_structure(const LGPotential& P, PairingForm form, Chart chart) {
    require_form_available(P, form);
    const ResidueData D = residue_data(P);
    const Eigen::MatrixXcd S = chart_basis_slots(P, D, form, chart);
    const cvector& w = (form == PairingForm::Angle) ? D.weights_angle : D.weights_round;
    const int K = P.K();

    Eigen::MatrixXcd G(K, K);
    std::vector<Eigen::MatrixXcd> C(static_cast<std::size_t>(K), Eigen::MatrixXcd::Zero(K, K));
    for (int a = 0; a < K; ++a)
        for (int b2 = 0; b2 < K; ++b2) {
            cplx g = 0.0;
            for (int n = 0; n < K; ++n) g += S(a, n) * S(b2, n) * w[static_cast<std::size_t>(n)];
            G(a, b2) = g;
        }
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k) {
                cplx acc = 0.0;
                for (int n = 0; n < K; ++n)
                    acc += S(i, n) * S(j, n) * S(k, n) * w[static_cast<std::size_t>(n)];
                C[static_cast<std::size_t>(i)](j, k) = acc;
            }

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(G);
    if (!(lu.rcond() > 1e-12))
        throw NumericalError("product_structure: singular metric in this chart");

    ProductStructure out;
    out.c.assign(static_cast<std::size_t>(K), Eigen::MatrixXcd::Zero(K, K));
    // c^l_{jk} from sum_i g^{li} C_{ijk}
    const Eigen::MatrixXcd Ginv = lu.inverse();
    for (int l = 0; l < K; ++l)
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k) {
                cplx acc = 0.0;
                for (int i = 0; i < K; ++i) acc += Ginv(l, i) * C[static_cast<std::size_t>(i)](j, k);
                out.c[static_cast<std::size_t>(l)](j, k) = acc;
            }

    double cmax = 0.0;
    for (const auto& m : out.c) cmax = std::max(cmax, m.cwiseAbs().maxCoeff());
    const double denom = std::max(cmax * cmax, 1e-300);
    for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l) {
                    cplx lhs = 0.0, rhs = 0.0;
                    for (int m = 0; m < K; ++m) {
                        lhs += out.c[static_cast<std::size_t>(m)](i, j) * out.c[static_cast<std::size_t>(l)](m, k);
                        rhs += out.c[static_cast<std::size_t>(m)](j, k) * out.c[static_cast<std::size_t>(l)](i, m);
                    }
                    out.associativity_residual =
                        std::max(out.associativity_residual, std::abs(lhs - rhs) / denom);
                }
    return out;
}

EulerHomogeneity euler_homogeneity_residual(const LGPotential& P, double rho) {
    LGPotential Q = P;
    for (cplx& z : Q.b) z *= rho;
    if (P.pcase == PotentialCase::II) {
        double rk = rho;
        for (int k = 1; k <= P.N; ++k) {
            Q.c[static_cast<std::size_t>(k - 1)] *= rk;
            rk *= rho;
        }
    }
    const CriticalFrame F0 = critical_frame(P);
    CriticalFrame scaled_ref = F0;
    for (cplx& g : scaled_ref.gamma) g *= rho;
    const CriticalFrame F1 = critical_frame_matched(Q, scaled_ref);
    const double factor = std::pow(rho, P.mtilde());
    EulerHomogeneity out;
    for (std::size_t n = 0; n < F0.gamma.size(); ++n) {
        out.gamma_residual = std::max(out.gamma_residual,
            std::abs(F1.gamma[n] - rho * F0.gamma[n]) / std::max(std::abs(rho * F0.gamma[n]), 1e-12));
        out.lam_residual = std::max(out.lam_residual,
            std::abs(F1.lam[n] - factor * F0.lam[n]) / std::max(std::abs(factor * F0.lam[n]), 1e-12));
    }
    return out;
}

}  // namespace dtoda
