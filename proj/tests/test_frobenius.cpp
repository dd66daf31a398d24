#include <doctest.h>

#include <functional>
#include <random>

#include "dtoda/frobenius.hpp"
#include "dtoda/sampling.hpp"
#include "dtoda/series.hpp"
#include "support/fixtures.hpp"

using namespace dtoda;
namespace fx = dtoda::fixtures;

namespace {

TangentVector basis(Chart chart, int K, int i) {
    TangentVector v;
    v.chart = chart;
    v.components = Eigen::VectorXcd::Zero(K);
    v.components(i) = 1.0;
    return v;
}

// trapezoidal contour quadrature of (1/2 pi i) \oint f dp around a circle —
// spectrally accurate, used as the independent residue oracle
cplx residue_quadrature(const std::function<cplx(cplx)>& f, cplx center, double radius,
                        int nodes = 512) {
    cplx acc = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const double th = 6.283185307179586 * j / nodes;
        const cplx z = center + std::polar(radius, th);
        acc += f(z) * (z - center);
    }
    return acc / static_cast<double>(nodes);
}

}  // namespace

TEST_CASE("lambda-chart pairings are the diagonal closed forms") {
    for (const LGPotential& P : {fx::toda(), fx::ablowitz_ladik(), fx::case2_basic(), fx::case2_k3()}) {
        const CriticalFrame F = critical_frame(P);
        const cvector alpha = alpha_coeffs(F).alpha;
        const int K = P.K();
        double diag_scale = 0.0;
        for (int n = 0; n < K; ++n)
            diag_scale = std::max(diag_scale, std::abs(alpha[static_cast<std::size_t>(n)] / F.gamma[static_cast<std::size_t>(n)]));
        for (int m = 0; m < K; ++m)
            for (int n = 0; n < K; ++n) {
                const cplx round_val = pairing(P, PairingForm::Round, basis(Chart::Lambda, K, m), basis(Chart::Lambda, K, n));
                const cplx round_expected = (m == n)
                    ? alpha[static_cast<std::size_t>(n)] / (F.gamma[static_cast<std::size_t>(n)] * F.lam[static_cast<std::size_t>(n)])
                    : cplx(0.0);
                CHECK(std::abs(round_val - round_expected) < 1e-10 * diag_scale);
                if (P.pcase == PotentialCase::I) {
                    const cplx angle_val = pairing(P, PairingForm::Angle, basis(Chart::Lambda, K, m), basis(Chart::Lambda, K, n));
                    const cplx angle_expected = (m == n)
                        ? alpha[static_cast<std::size_t>(n)] / F.gamma[static_cast<std::size_t>(n)]
                        : cplx(0.0);
                    CHECK(std::abs(angle_val - angle_expected) < 1e-10 * diag_scale);
                }
            }
    }
}

TEST_CASE("Toda anchor values: <d1,d1> = 1/(2 sqrt 3) etc.") {
    const LGPotential P = fx::toda();
    // index 1 is gamma = +sqrt(3), alpha = 1/2
    const cplx v = pairing(P, PairingForm::Angle, basis(Chart::Lambda, 2, 1), basis(Chart::Lambda, 2, 1));
    CHECK(std::abs(v - cplx(0.5 / std::sqrt(3.0))) < 1e-12);
    const cplx c = cubic(P, PairingForm::Angle, basis(Chart::Lambda, 2, 1), basis(Chart::Lambda, 2, 1),
                         basis(Chart::Lambda, 2, 1));
    CHECK(std::abs(c - cplx(1.0 / (2.0 * std::sqrt(3.0)))) < 1e-12);
}

TEST_CASE("lambda-chart cubic forms are the diagonal closed forms") {
    const LGPotential P = fx::case2_k3();
    const CriticalFrame F = critical_frame(P);
    const cvector alpha = alpha_coeffs(F).alpha;
    const int K = P.K();
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < K; ++m)
            for (int n = 0; n < K; ++n) {
                const cplx val = cubic(P, PairingForm::Round, basis(Chart::Lambda, K, k),
                                       basis(Chart::Lambda, K, m), basis(Chart::Lambda, K, n));
                const cplx expected = (k == m && m == n)
                    ? alpha[static_cast<std::size_t>(n)] /
                          (F.gamma[static_cast<std::size_t>(n)] * F.lam[static_cast<std::size_t>(n)] * F.lam[static_cast<std::size_t>(n)])
                    : cplx(0.0);
                CHECK(std::abs(val - expected) < 1e-10);
            }
}

TEST_CASE("pairing and cubic are multilinear and slot-symmetric") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const LGPotential P = fx::dz_k3();
    const int K = P.K();
    auto rand_vec = [&](Chart chart) {
        TangentVector v;
        v.chart = chart;
        v.components = Eigen::VectorXcd(K);
        for (int i = 0; i < K; ++i) v.components(i) = cplx(d(rng), d(rng));
        return v;
    };
    for (int trial = 0; trial < 4; ++trial) {
        const TangentVector X = rand_vec(Chart::Natural);
        const TangentVector Y = rand_vec(Chart::Lambda);
        const TangentVector Z = rand_vec(Chart::Natural);
        const cplx a(0.7, -0.3);
        for (PairingForm form : {PairingForm::Angle, PairingForm::Round}) {
            CHECK(std::abs(pairing(P, form, X, Y) - pairing(P, form, Y, X)) < 1e-12);
            TangentVector Xs = X;
            Xs.components *= a;
            CHECK(std::abs(pairing(P, form, Xs, Y) - a * pairing(P, form, X, Y)) < 1e-12);
            const cplx c1 = cubic(P, form, X, Y, Z);
            CHECK(std::abs(c1 - cubic(P, form, Z, X, Y)) < 1e-12);
            CHECK(std::abs(c1 - cubic(P, form, Y, Z, X)) < 1e-12);
        }
    }
}

TEST_CASE("chart conversions are mutually inverse") {
    for (const LGPotential& P : {fx::toda(), fx::case2_k3()}) {
        const int K = P.K();
        std::mt19937 rng(13);
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        TangentVector v;
        v.chart = Chart::Natural;
        v.components = Eigen::VectorXcd(K);
        for (int i = 0; i < K; ++i) v.components(i) = cplx(d(rng), d(rng));
        const TangentVector lam = convert(P, v, Chart::Lambda);
        const TangentVector back = convert(P, lam, Chart::Natural);
        CHECK((back.components - v.components).cwiseAbs().maxCoeff() < 1e-10);
        const TangentVector flat = convert(P, v, Chart::Flat);
        const TangentVector back2 = convert(P, flat, Chart::Natural);
        CHECK((back2.components - v.components).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("Case I round metric in the natural chart: closed form") {
    // (d_bi, d_bj) = (1-delta) kappa_i kappa_j/(N b_i b_j) + delta (kappa_i - N) kappa_i/(N b_i^2)
    std::mt19937 rng(19);
    auto check_model = [](const LGPotential& P) {
        const Eigen::MatrixXcd G = metric_matrix(P, PairingForm::Round, Chart::Natural);
        const double N = static_cast<double>(P.N);
        double scale = G.cwiseAbs().maxCoeff();
        for (int i = 0; i < P.M(); ++i)
            for (int j = 0; j < P.M(); ++j) {
                const cplx expected =
                    (i == j) ? (P.kappa[static_cast<std::size_t>(i)] - N) * P.kappa[static_cast<std::size_t>(i)] /
                                   (N * P.b[static_cast<std::size_t>(i)] * P.b[static_cast<std::size_t>(i)])
                             : P.kappa[static_cast<std::size_t>(i)] * P.kappa[static_cast<std::size_t>(j)] /
                                   (N * P.b[static_cast<std::size_t>(i)] * P.b[static_cast<std::size_t>(j)]);
                CHECK(std::abs(G(i, j) - expected) < 1e-8 * std::max(scale, 1.0));
            }
    };
    check_model(fx::toda());
    check_model(fx::ablowitz_ladik());
    for (int trial = 0; trial < 10; ++trial) check_model(random_model(rng, PotentialCase::I));
}

TEST_CASE("Ablowitz-Ladik natural round metric anchor entries") {
    const Eigen::MatrixXcd G = metric_matrix(fx::ablowitz_ladik(), PairingForm::Round, Chart::Natural);
    CHECK(std::abs(G(0, 0) - cplx(-2.0)) < 1e-10);
    CHECK(std::abs(G(0, 1) - cplx(0.5)) < 1e-10);
}

TEST_CASE("Case II natural round metric: Lemma entries") {
    for (const LGPotential& P : {fx::case2_basic(), fx::case2_k3()}) {
        const Eigen::MatrixXcd G = metric_matrix(P, PairingForm::Round, Chart::Natural);
        const double N = static_cast<double>(P.N);
        const int M = P.M();
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                const cplx expected = (i == j)
                    ? -P.kappa[static_cast<std::size_t>(i)] / (P.b[static_cast<std::size_t>(i)] * P.b[static_cast<std::size_t>(i)])
                    : cplx(0.0);
                CHECK(std::abs(G(i, j) - expected) < 1e-9);
            }
            for (int k = 1; k <= P.N; ++k) {
                const cplx expected = (k == P.N)
                    ? P.kappa[static_cast<std::size_t>(i)] / (N * P.b[static_cast<std::size_t>(i)] * P.c.back())
                    : cplx(0.0);
                CHECK(std::abs(G(i, M + k - 1) - expected) < 1e-9);
            }
        }
    }
}

TEST_CASE("angle form is unavailable for Case II") {
    const LGPotential P = fx::case2_basic();
    CHECK_THROWS_AS((void)metric_matrix(P, PairingForm::Angle, Chart::Natural), ValidationError);
}

TEST_CASE("residue-theorem consistency of the Case II pairing") {
    const LGPotential P = fx::case2_k3();
    const CriticalFrame F = critical_frame(P);
    const cvector alpha = alpha_coeffs(F).alpha;
    auto R = [&](cplx p) { return 1.0 / log_derivatives(P, p).first; };

    // (b_i, b_i) integrand: gamma-residues equal minus the residue at b_i
    auto omega_bb = [&](cplx p) {
        const cplx q = 1.0 / (p - P.b[0]);
        return q * q * R(p) / (p * p);  // kappa = 1
    };
    cplx gamma_sum = 0.0;
    for (int n = 0; n < P.K(); ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        const cplx slot = 1.0 / (g - P.b[0]);
        gamma_sum += slot * slot * F.lam[static_cast<std::size_t>(n)] * alpha[static_cast<std::size_t>(n)] / g;
    }
    const cplx res_b = residue_quadrature(omega_bb, P.b[0], 0.08);
    CHECK(std::abs(gamma_sum + res_b) < 1e-8 * std::max(1.0, std::abs(res_b)));

    // (b_i, c_N) integrand: gamma-residues equal minus the residue at 0
    auto omega_bc = [&](cplx p) {
        return -std::pow(p, -P.N) / (p - P.b[0]) * R(p) / (p * p);
    };
    cplx gamma_sum2 = 0.0;
    for (int n = 0; n < P.K(); ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        gamma_sum2 += (-1.0 / (g - P.b[0])) * std::pow(g, -P.N) *
                      F.lam[static_cast<std::size_t>(n)] * alpha[static_cast<std::size_t>(n)] / g;
    }
    const cplx res_0 = residue_quadrature(omega_bc, cplx(0.0), 0.15);
    CHECK(std::abs(gamma_sum2 + res_0) < 1e-8 * std::max(1.0, std::abs(res_0)));
}

TEST_CASE("flat coordinates: Toda DZ chart is (log 3, -4)") {
    const FlatChart chart = flat_coordinates(fx::toda());
    CHECK(chart.kind == FlatChart::Kind::DZCaseI);
    REQUIRE(chart.labels.size() == 2);
    CHECK(chart.labels[0] == "qbar0");
    CHECK(chart.labels[1] == "qbar1");
    CHECK(std::abs(chart.values[0] - cplx(std::log(3.0))) < 1e-12);
    CHECK(std::abs(chart.values[1] - cplx(-4.0)) < 1e-12);
}

TEST_CASE("flat coordinates: Case II M=N=1 chart is (log b, log c)/...") {
    const FlatChart chart = flat_coordinates(fx::case2_basic());
    CHECK(chart.kind == FlatChart::Kind::CaseII);
    REQUIRE(chart.labels.size() == 2);
    CHECK(chart.labels[0] == "logb1");
    CHECK(chart.labels[1] == "qbar0");
    CHECK(std::abs(chart.values[0]) < 1e-13);                       // log 1
    CHECK(std::abs(chart.values[1] - cplx(std::log(5.0))) < 1e-13); // phi = Log c_N / N
}

TEST_CASE("DZ chart is gated to kappa_i = 1, N >= 1") {
    CHECK_THROWS_AS((void)flat_coordinates(fx::ablowitz_ladik()), ValidationError);
    const LGPotential P = validate_potential(PotentialCase::I, 1, {2.0, 1.0}, {cplx(3.0), cplx(1.0)});
    CHECK_THROWS_AS((void)flat_coordinates(P), ValidationError);
}

TEST_CASE("Case II: exp(N qbar_N) equals the product of (-b_i)^kappa_i") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 6; ++trial) {
        const LGPotential P = random_model(rng, PotentialCase::II);
        // qbar_N is the first coefficient beyond the flat chart
        const int W = P.N + P.K() + 8;
        const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W);
        TruncatedSeries power = TruncatedSeries::monomial(Center::AtZero, 0, 1.0).truncated_to(W);
        for (int n = 1; n <= P.N; ++n) power = power * zb.series;
        const cplx qbarN = power.coeff_of_p(0) / static_cast<double>(P.N);
        cplx prod = 1.0;
        for (int i = 0; i < P.M(); ++i)
            prod *= std::exp(P.kappa[static_cast<std::size_t>(i)] * std::log(-P.b[static_cast<std::size_t>(i)]));
        CHECK(std::abs(std::exp(static_cast<double>(P.N) * qbarN) - prod) < 1e-10 * std::abs(prod));
    }
}

TEST_CASE("qbar from residues matches the log pbar expansion") {
    // the coefficients of log pbar(zeta) = -log zeta + qbar_0 + qbar_1/zeta + ...
    // must reproduce the residue values (1/n) [p^0] zbar^n
    std::mt19937 rng(37);
    const LGPotential P = random_model(rng, PotentialCase::II);
    const int W = 20;
    const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W);
    const TruncatedSeries pbar = revert(zb.series.truncated_to(W));
    cvector e = pbar.coeffs();
    const cplx lead = e[0];
    for (cplx& z : e) z /= lead;
    const TruncatedSeries lg = s_log(TruncatedSeries(Center::AtInfinity, 0, std::move(e), false));
    // qbar_0 through the leading coefficient, branch-free in the exponent
    CHECK(std::abs(lead - std::exp(zb.phi)) < 1e-10 * std::abs(lead));
    TruncatedSeries power = TruncatedSeries::monomial(Center::AtZero, 0, 1.0).truncated_to(W);
    for (int n = 1; n <= P.N + 2; ++n) {
        power = power * zb.series;
        const cplx residue_route = power.coeff_of_p(0) / static_cast<double>(n);
        CHECK(std::abs(lg.coeff_of_w(n) - residue_route) < 1e-9 * std::max(1.0, std::abs(residue_route)));
    }
}

TEST_CASE("Case II qbar <-> c inversion round trip") {
    const LGPotential P = fx::case2_k3();
    const FlatChart chart = flat_coordinates(P);
    // chart = (logb1, qbar0, qbar1)
    const cvector qbar_target = {chart.values[1], chart.values[2]};
    cvector guess = {cplx(1.3, 0.2), cplx(4.0, -0.3)};
    const cvector c = case2_c_from_qbar(P, qbar_target, guess);
    CHECK(std::abs(c[0] - P.c[0]) < 1e-9);
    CHECK(std::abs(c[1] - P.c[1]) < 1e-9);
}

TEST_CASE("flat metric report: Toda DZ constants [[0,1],[1,0]]") {
    const FlatMetricReport rep = flat_metric_report(fx::toda());
    CHECK(std::abs(rep.matrix(0, 0)) < 1e-8);
    CHECK(std::abs(rep.matrix(0, 1) - cplx(1.0)) < 1e-8);
    CHECK(std::abs(rep.matrix(1, 0) - cplx(1.0)) < 1e-8);
    CHECK(std::abs(rep.matrix(1, 1)) < 1e-8);
    CHECK(rep.max_error < 1e-8);
    CHECK(rep.constancy_deviation < 1e-8);
}

TEST_CASE("flat metric report: Case II M=N=1 constants [[-1,-1],[-1,0]]") {
    const FlatMetricReport rep = flat_metric_report(fx::case2_basic());
    CHECK(std::abs(rep.matrix(0, 0) - cplx(-1.0)) < 1e-8);
    CHECK(std::abs(rep.matrix(0, 1) - cplx(-1.0)) < 1e-8);
    CHECK(std::abs(rep.matrix(1, 0) - cplx(-1.0)) < 1e-8);
    CHECK(std::abs(rep.matrix(1, 1)) < 1e-8);
    CHECK(rep.max_error < 1e-8);
    CHECK(rep.constancy_deviation < 1e-8);
}

TEST_CASE("flat metric report: DZ K=3 and Case II K=3 match the constants") {
    const FlatMetricReport dz = flat_metric_report(fx::dz_k3());
    CHECK(dz.max_error < 1e-8);
    // expected [[2,0,0],[0,0,1],[0,1,0]] in (q1, qbar0, qbar1)
    CHECK(std::abs(dz.matrix(0, 0) - cplx(2.0)) < 1e-8);
    CHECK(std::abs(dz.matrix(1, 2) - cplx(1.0)) < 1e-8);
    const FlatMetricReport c2 = flat_metric_report(fx::case2_k3());
    CHECK(c2.max_error < 1e-8);
    CHECK(c2.constancy_deviation < 1e-8);
    // expected [[-1,-1,0],[-1,0,0],[0,0,2]] in (logb1, qbar0, qbar1)
    CHECK(std::abs(c2.matrix(0, 0) - cplx(-1.0)) < 1e-8);
    CHECK(std::abs(c2.matrix(0, 1) - cplx(-1.0)) < 1e-8);
    CHECK(std::abs(c2.matrix(2, 2) - cplx(2.0)) < 1e-8);
}

TEST_CASE("thermodynamic identity: d log lambda/d qbar_n through order zeta^{-N}") {
    const LGPotential P = fx::case2_k3();  // N = 2
    const int N = P.N;
    const FlatChart chart = flat_coordinates(P);
    const cvector qbar0 = {chart.values[1], chart.values[2]};
    const int W = 18;
    const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W);
    const TruncatedSeries pbar = revert(zb.series.truncated_to(W));

    // B = p d(log lambda)/dp as a series at 0
    TruncatedSeries B = TruncatedSeries(Center::AtZero, W, {}, false);
    for (int k = 1; k <= N; ++k)
        B = B + TruncatedSeries::monomial(Center::AtZero, -k, -static_cast<double>(k) * P.c[static_cast<std::size_t>(k - 1)])
                    .truncated_to(W);
    for (int i = 0; i < P.M(); ++i)
        B = B + P.kappa[static_cast<std::size_t>(i)] *
                    (TruncatedSeries::monomial(Center::AtZero, 1, 1.0).truncated_to(W) *
                     TruncatedSeries::pole_expansion(Center::AtZero, P.b[static_cast<std::size_t>(i)], W));

    for (int n = 0; n < N; ++n) {
        // FD of c(qbar) at fixed b
        const double h = 1e-6;
        cvector qp = qbar0, qm = qbar0;
        qp[static_cast<std::size_t>(n)] += h;
        qm[static_cast<std::size_t>(n)] -= h;
        const cvector cp = case2_c_from_qbar(P, qp, P.c);
        const cvector cm = case2_c_from_qbar(P, qm, P.c);
        // A = d log lambda/d qbar_n = sum_k (dc_k/dqbar_n) p^{-k}
        TruncatedSeries A = TruncatedSeries(Center::AtZero, W, {}, false);
        for (int k = 1; k <= N; ++k)
            A = A + TruncatedSeries::monomial(Center::AtZero, -k,
                        (cp[static_cast<std::size_t>(k - 1)] - cm[static_cast<std::size_t>(k - 1)]) / (2.0 * h))
                        .truncated_to(W);
        // W_series = -A/B must equal zeta^{-n} + O(zeta^{-N-1})
        const TruncatedSeries Wser = scale(mul(A, invert(B, W)), -1.0);
        const TruncatedSeries U = compose(Wser, pbar);
        for (int m = 0; m <= N; ++m) {
            const cplx expected = (m == n) ? cplx(1.0) : cplx(0.0);
            CHECK(std::abs(U.coeff_of_w(m) - expected) < 1e-6);
        }
    }
}

TEST_CASE("product structure: diagonal in the lambda chart, associative") {
    for (const LGPotential& P : {fx::toda(), fx::case2_k3()}) {
        const ProductStructure prod = product_structure(P, PairingForm::Round, Chart::Lambda);
        CHECK(prod.associativity_residual < 1e-10);
        const int K = P.K();
        double offdiag = 0.0, diag = 0.0;
        for (int l = 0; l < K; ++l)
            for (int j = 0; j < K; ++j)
                for (int k = 0; k < K; ++k) {
                    const double v = std::abs(prod.c[static_cast<std::size_t>(l)](j, k));
                    if (l == j && j == k) diag = std::max(diag, v);
                    else offdiag = std::max(offdiag, v);
                }
        CHECK(offdiag < 1e-10 * diag);
    }
}

TEST_CASE("product structure: K=1 is trivially associative") {
    const ProductStructure prod = product_structure(fx::k1_kappa2(), PairingForm::Round, Chart::Natural);
    CHECK(prod.associativity_residual < 1e-14);
}

TEST_CASE("product structure in the Case II flat chart") {
    const ProductStructure prod = product_structure(fx::case2_basic(), PairingForm::Round, Chart::Flat);
    CHECK(prod.associativity_residual < 1e-8);
}

TEST_CASE("Euler scaling residuals") {
    for (const LGPotential& P : {fx::toda(), fx::ablowitz_ladik(), fx::dz_k3()}) {
        const EulerHomogeneity e = euler_homogeneity_residual(P, 1.05);
        CHECK(e.lam_residual < 1e-9);
        CHECK(e.gamma_residual < 1e-9);
    }
    for (const LGPotential& P : {fx::case2_basic(), fx::case2_k3()}) {
        const EulerHomogeneity e = euler_homogeneity_residual(P, 1.05);
        CHECK(e.lam_residual < 1e-9);
        CHECK(e.gamma_residual < 1e-9);
    }
}
