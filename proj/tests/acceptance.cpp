// Acceptance suite: every check prints one pass/fail line and the process
// exits nonzero if any asserted check fails.

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dtoda/frobenius.hpp"
#include "dtoda/geometry.hpp"
#include "dtoda/hydro.hpp"
#include "dtoda/loewner.hpp"
#include "dtoda/sampling.hpp"
#include "dtoda/series.hpp"

using namespace dtoda;

namespace {

LGPotential toda() { return validate_potential(PotentialCase::I, 1, {1.0, 1.0}, {cplx(3.0), cplx(1.0)}); }
LGPotential ablowitz_ladik() { return validate_potential(PotentialCase::I, -1, {1.0, -1.0}, {cplx(1.0), cplx(2.0)}); }
LGPotential case2_basic() { return validate_potential(PotentialCase::II, 1, {1.0}, {cplx(1.0)}, {cplx(5.0)}); }
LGPotential case2_k3() { return validate_potential(PotentialCase::II, 2, {1.0}, {cplx(1.0)}, {cplx(1.0), cplx(5.0)}); }
LGPotential dz_k3() { return validate_potential(PotentialCase::I, 1, {1.0, 1.0, 1.0}, {cplx(1.0), cplx(2.0), cplx(3.0)}); }
LGPotential k1_kappa2(cplx b) { return validate_potential(PotentialCase::I, 1, {2.0}, {b}); }

int failures = 0;

void report(int criterion, const std::string& what, bool ok, const std::string& detail,
            bool asserted = true) {
    const char* tag = asserted ? (ok ? "PASS" : "FAIL") : "REPORTED";
    std::printf("criterion %d: %-8s %s (%s)\n", criterion, tag, what.c_str(), detail.c_str());
    if (asserted && !ok) ++failures;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

bool ratio_ok(double r1, double r2, double lo, double hi) {
    // when both residuals sit at the rounding floor the order cannot be
    // measured, but the identity holds beyond requirement
    if (r1 < 5e-9 && r2 < 5e-9) return true;
    const double q = r1 / std::max(r2, 1e-300);
    return q > lo && q < hi;
}

void criterion1() {
    double worst = 0.0, worst_ratio_lo = 1e300, worst_ratio_hi = 0.0;
    bool ok = true;
    unsigned seed = 101;
    for (const LGPotential& P : {toda(), ablowitz_ladik(), case2_basic()}) {
        const cvector samples = loewner_sample_points(P, 8, seed++);
        const double r = loewner_residual(P, samples, 1e-5);
        worst = std::max(worst, r);
        const double c1 = loewner_residual(P, samples, 1e-4);
        const double c2 = loewner_residual(P, samples, 5e-5);
        ok = ok && ratio_ok(c1, c2, 3.2, 4.8);
        if (c2 > 0) {
            worst_ratio_lo = std::min(worst_ratio_lo, c1 / c2);
            worst_ratio_hi = std::max(worst_ratio_hi, c1 / c2);
        }
    }
    ok = ok && worst < 1e-6;
    report(1, "Loewner identity on the three fixtures",
           ok, "max residual " + fmt(worst) + ", h-halving ratios in [" +
               fmt(worst_ratio_lo) + ", " + fmt(worst_ratio_hi) + "]");
}

void criterion2() {
    double worst = 0.0;
    bool ok = true;
    std::mt19937 rng(202);
    std::vector<LGPotential> models = {toda(), ablowitz_ladik(), case2_basic()};
    for (int i = 0; i < 5; ++i) models.push_back(random_model(rng, PotentialCase::I));
    for (int i = 0; i < 5; ++i) models.push_back(random_model(rng, PotentialCase::II));
    for (const LGPotential& P : models) {
        if (P.K() < 2) continue;
        worst = std::max(worst, gt_residual(P, 1e-5).max());
        ok = ok && ratio_ok(gt_residual(P, 1e-4).max(), gt_residual(P, 5e-5).max(), 3.2, 4.8);
    }
    ok = ok && worst < 1e-6;
    report(2, "Gibbons-Tsarev equations on fixtures + 10 random models",
           ok, "max residual " + fmt(worst));
}

void criterion3() {
    const LGPotential tpl = k1_kappa2(cplx(1.5));
    Grid grid;
    grid.axes.push_back({"s", {}});
    for (int i = 0; i <= 20; ++i) grid.axes[0].values.push_back(1.5 + 0.05 * i);
    grid.axes.push_back({"t1", {1.0}});
    const SolutionField field = hodograph_sweep(tpl, grid, HodographData{}, tpl);
    double worst = 0.0;
    for (std::size_t i = 0; i < field.nodes.size(); ++i) {
        const double s = grid.axes[0].values[i];
        worst = std::max(worst, std::abs(field.nodes[i].P.b[0] - cplx(s)));
        worst = std::max(worst, std::abs(field.nodes[i].frame.lam[0] - cplx(-4.0 * s)));
    }
    auto pde_at = [&](double spacing) {
        Grid g2;
        g2.axes.push_back({"s", {}});
        g2.axes.push_back({"t1", {}});
        for (int i = -2; i <= 2; ++i) {
            g2.axes[0].values.push_back(2.0 + spacing * i);
            g2.axes[1].values.push_back(1.0 + spacing * i);
        }
        const SolutionField f = hodograph_sweep(tpl, g2, HodographData{}, k1_kappa2(cplx(2.0)));
        return pde_residual(f, {LaxSide::ZAtInfinity, 1});
    };
    const double r1 = pde_at(0.02), r2 = pde_at(0.01);
    const bool ok = worst < 1e-10 && ratio_ok(r1, r2, 3.0, 5.0);
    report(3, "K=1 hodograph closed form b = s/t1, lambda = -4s/t1",
           ok, "max field error " + fmt(worst) + ", pde ratio " + fmt(r1 / r2));
}

void criterion4() {
    const LGPotential P = toda();
    auto sweep = [&](double spacing) {
        SpaceTimePoint anchor;
        anchor.s = 2.0;
        anchor.t[1] = 4.0;
        const HodographData data = make_seed_data(P, anchor, {{LaxSide::ZAtInfinity, 2}});
        Grid grid;
        grid.axes.push_back({"s", {}});
        grid.axes.push_back({"t1", {}});
        for (int i = -2; i <= 2; ++i) {
            grid.axes[0].values.push_back(2.0 + spacing * i);
            grid.axes[1].values.push_back(4.0 + spacing * i);
        }
        return hodograph_sweep(P, grid, data, P, 1e-12);
    };
    const cvector samples = {cplx(0.9, 0.7), cplx(-1.3, 0.4), cplx(2.2, -1.1), cplx(-0.5, -1.8)};
    const SolutionField f1 = sweep(0.0025);
    const double lax1 = lax_flow_residual(f1, {LaxSide::ZAtInfinity, 1}, samples);

    // cross-check against evolution_rhs at the center node, two spacings
    auto cross = [&](const SolutionField& f, double h) {
        const Grid& g = f.grid;
        auto node = [&](std::size_t i, std::size_t j) -> const HodographSolution& {
            return f.nodes[g.flatten({i, j})];
        };
        cvector db_ds(2), db_dt(2);
        for (int i = 0; i < 2; ++i) {
            db_ds[static_cast<std::size_t>(i)] =
                (node(3, 2).P.b[static_cast<std::size_t>(i)] - node(1, 2).P.b[static_cast<std::size_t>(i)]) / (2.0 * h);
            db_dt[static_cast<std::size_t>(i)] =
                (node(2, 3).P.b[static_cast<std::size_t>(i)] - node(2, 1).P.b[static_cast<std::size_t>(i)]) / (2.0 * h);
        }
        const EvolutionRHS rhs = evolution_rhs(node(2, 2).P, db_ds, {}, {LaxSide::ZAtInfinity, 1});
        double worst = 0.0;
        for (int i = 0; i < 2; ++i)
            worst = std::max(worst, std::abs(rhs.F[static_cast<std::size_t>(i)] - db_dt[static_cast<std::size_t>(i)]));
        // the induced Toda evolution: d(u1)/dt = d(u2)/ds, d(u2)/dt = u2 d(u1)/ds
        auto u1 = [](const LGPotential& Q) { return -(Q.b[0] + Q.b[1]); };
        auto u2 = [](const LGPotential& Q) { return Q.b[0] * Q.b[1]; };
        const cplx du1_dt = (u1(node(2, 3).P) - u1(node(2, 1).P)) / (2.0 * h);
        const cplx du2_ds = (u2(node(3, 2).P) - u2(node(1, 2).P)) / (2.0 * h);
        const cplx du2_dt = (u2(node(2, 3).P) - u2(node(2, 1).P)) / (2.0 * h);
        const cplx du1_ds = (u1(node(3, 2).P) - u1(node(1, 2).P)) / (2.0 * h);
        worst = std::max(worst, std::abs(du1_dt - du2_ds));
        worst = std::max(worst, std::abs(du2_dt - u2(node(2, 2).P) * du1_ds));
        return worst;
    };
    const double c1 = cross(sweep(0.005), 0.005);
    const double c2 = cross(f1, 0.0025);
    const bool ok = lax1 < 1e-5 && ratio_ok(c1, c2, 2.8, 5.5);
    report(4, "Lax consistency on a 1D Toda hodograph sweep",
           ok, "lax residual " + fmt(lax1) + ", evolution cross-check " + fmt(c2) +
               " with order ratio " + fmt(c1 / std::max(c2, 1e-300)));
}

void criterion5() {
    double worst_lambda = 0.0;
    bool ok = true;
    for (const LGPotential& P : {toda(), ablowitz_ladik(), case2_basic(), case2_k3()}) {
        const CriticalFrame F = critical_frame(P);
        const cvector alpha = alpha_coeffs(F).alpha;
        const int K = P.K();
        double diag = 0.0;
        for (int n = 0; n < K; ++n)
            diag = std::max(diag, std::abs(alpha[static_cast<std::size_t>(n)] / F.gamma[static_cast<std::size_t>(n)]));
        const Eigen::MatrixXcd Gr = metric_matrix(P, PairingForm::Round, Chart::Lambda);
        for (int m = 0; m < K; ++m)
            for (int n = 0; n < K; ++n) {
                const cplx er = (m == n) ? alpha[static_cast<std::size_t>(n)] /
                                               (F.gamma[static_cast<std::size_t>(n)] * F.lam[static_cast<std::size_t>(n)])
                                         : cplx(0.0);
                worst_lambda = std::max(worst_lambda, std::abs(Gr(m, n) - er) / diag);
            }
        if (P.pcase == PotentialCase::I) {
            const Eigen::MatrixXcd Ga = metric_matrix(P, PairingForm::Angle, Chart::Lambda);
            for (int m = 0; m < K; ++m)
                for (int n = 0; n < K; ++n) {
                    const cplx ea = (m == n) ? alpha[static_cast<std::size_t>(n)] / F.gamma[static_cast<std::size_t>(n)]
                                             : cplx(0.0);
                    worst_lambda = std::max(worst_lambda, std::abs(Ga(m, n) - ea) / diag);
                }
        }
    }
    ok = ok && worst_lambda < 1e-10;

    std::mt19937 rng(505);
    double worst_nat = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const LGPotential P = random_model(rng, PotentialCase::I);
        const Eigen::MatrixXcd G = metric_matrix(P, PairingForm::Round, Chart::Natural);
        const double N = static_cast<double>(P.N);
        const double scale = std::max(G.cwiseAbs().maxCoeff(), 1.0);
        for (int i = 0; i < P.M(); ++i)
            for (int j = 0; j < P.M(); ++j) {
                const cplx expected =
                    (i == j) ? (P.kappa[static_cast<std::size_t>(i)] - N) * P.kappa[static_cast<std::size_t>(i)] /
                                   (N * P.b[static_cast<std::size_t>(i)] * P.b[static_cast<std::size_t>(i)])
                             : P.kappa[static_cast<std::size_t>(i)] * P.kappa[static_cast<std::size_t>(j)] /
                                   (N * P.b[static_cast<std::size_t>(i)] * P.b[static_cast<std::size_t>(j)]);
                worst_nat = std::max(worst_nat, std::abs(G(i, j) - expected) / scale);
            }
    }
    ok = ok && worst_nat < 1e-8;
    report(5, "metric anchors: lambda-chart deltas and Case I round matrix",
           ok, "lambda-chart " + fmt(worst_lambda) + ", natural closed form " + fmt(worst_nat));
}

void criterion6() {
    const FlatMetricReport toda_rep = flat_metric_report(toda());
    Eigen::MatrixXcd expect_toda(2, 2);
    expect_toda << cplx(0.0), cplx(1.0), cplx(1.0), cplx(0.0);
    const double e1 = (toda_rep.matrix - expect_toda).cwiseAbs().maxCoeff();

    const FlatMetricReport c2_rep = flat_metric_report(case2_basic());
    Eigen::MatrixXcd expect_c2(2, 2);
    expect_c2 << cplx(-1.0), cplx(-1.0), cplx(-1.0), cplx(0.0);
    const double e2 = (c2_rep.matrix - expect_c2).cwiseAbs().maxCoeff();

    const bool ok = e1 < 1e-8 && e2 < 1e-8 && toda_rep.constancy_deviation < 1e-8 &&
                    c2_rep.constancy_deviation < 1e-8;
    report(6, "flat charts: Toda [[0,1],[1,0]] and Case II [[-1,-1],[-1,0]]",
           ok, "entry errors " + fmt(e1) + "/" + fmt(e2) + ", constancy " +
               fmt(std::max(toda_rep.constancy_deviation, c2_rep.constancy_deviation)));
}

void criterion7() {
    bool ok = true;
    double worst_rot = 0.0;
    for (const LGPotential& P : {toda(), ablowitz_ladik(), case2_basic(), case2_k3(), dz_k3()})
        worst_rot = std::max(worst_rot, rotation_check(P, 1e-5).max());
    ok = ok && worst_rot < 1e-6;

    const GeometryResiduals g1 = geometry_residuals(dz_k3(), 1e-5);
    const GeometryResiduals g2 = geometry_residuals(case2_k3(), 1e-5);
    ok = ok && g1.darboux_applicable && g2.darboux_applicable;
    ok = ok && g1.darboux < 1e-5 && g2.darboux < 1e-5;
    ok = ok && g1.hat_homogeneity < 1e-6 && g2.hat_homogeneity < 1e-6;

    // Combescure with w = gamma must reproduce the GT gamma-equation values
    double worst_comb = 0.0;
    for (const LGPotential& P : {toda(), ablowitz_ladik(), case2_k3()}) {
        LambdaChart chart(P);
        const int K = chart.K();
        for (int m = 0; m < K; ++m) {
            const double step = chart.step_for(m, 1e-5);
            const InversionResult plus = chart.shifted(m, step);
            const InversionResult minus = chart.shifted(m, -step);
            for (int n = 0; n < K; ++n) {
                if (n == m) continue;
                const cplx gm = chart.frame().gamma[static_cast<std::size_t>(m)];
                const cplx gn = chart.frame().gamma[static_cast<std::size_t>(n)];
                const cplx dg = (plus.frame.gamma[static_cast<std::size_t>(n)] -
                                 minus.frame.gamma[static_cast<std::size_t>(n)]) / (2.0 * step);
                const cplx gt = chart.alpha()[static_cast<std::size_t>(m)] * gn / ((gm - gn) * (gm - gn));
                worst_comb = std::max(worst_comb,
                                      std::abs(dg / (gm - gn) - gt) / std::max(1.0, std::abs(gt)));
            }
        }
    }
    ok = ok && worst_comb < 1e-6;
    report(7, "geometry: rotation, Darboux (K=3 I and II), hat homogeneity, Combescure",
           ok, "rotation " + fmt(worst_rot) + ", darboux " + fmt(std::max(g1.darboux, g2.darboux)) +
               ", homogeneity " + fmt(std::max(g1.hat_homogeneity, g2.hat_homogeneity)) +
               ", combescure " + fmt(worst_comb));
}

void criterion8() {
    // exp(N qbar_N) = prod (-b_i)^{kappa_i}
    double worst_q = 0.0;
    for (const LGPotential& P : {case2_basic(), case2_k3()}) {
        const int W = P.N + P.K() + 8;
        const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W);
        TruncatedSeries power = TruncatedSeries::monomial(Center::AtZero, 0, 1.0).truncated_to(W);
        for (int n = 1; n <= P.N; ++n) power = power * zb.series;
        const cplx qbarN = power.coeff_of_p(0) / static_cast<double>(P.N);
        cplx prod = 1.0;
        for (int i = 0; i < P.M(); ++i)
            prod *= std::exp(P.kappa[static_cast<std::size_t>(i)] * std::log(-P.b[static_cast<std::size_t>(i)]));
        worst_q = std::max(worst_q,
                           std::abs(std::exp(static_cast<double>(P.N) * qbarN) - prod) / std::abs(prod));
    }

    // d log lambda/d qbar_n = -zeta^{-n} + O(zeta^{-N-1}) through order zeta^{-N}
    const LGPotential P = case2_k3();
    const int N = P.N;
    const FlatChart chart = flat_coordinates(P);
    const cvector qbar0 = {chart.values[1], chart.values[2]};
    const int W = 18;
    const LaxExpansion zb = expand_lax(P, LaxSide::ZbarAtZero, W);
    const TruncatedSeries pbar = revert(zb.series.truncated_to(W));
    TruncatedSeries B = TruncatedSeries(Center::AtZero, W, {}, false);
    for (int k = 1; k <= N; ++k)
        B = B + TruncatedSeries::monomial(Center::AtZero, -k, -static_cast<double>(k) * P.c[static_cast<std::size_t>(k - 1)])
                    .truncated_to(W);
    for (int i = 0; i < P.M(); ++i)
        B = B + P.kappa[static_cast<std::size_t>(i)] *
                    (TruncatedSeries::monomial(Center::AtZero, 1, 1.0).truncated_to(W) *
                     TruncatedSeries::pole_expansion(Center::AtZero, P.b[static_cast<std::size_t>(i)], W));
    double worst_c = 0.0;
    for (int n = 0; n < N; ++n) {
        const double h = 1e-6;
        cvector qp = qbar0, qm = qbar0;
        qp[static_cast<std::size_t>(n)] += h;
        qm[static_cast<std::size_t>(n)] -= h;
        const cvector cp = case2_c_from_qbar(P, qp, P.c);
        const cvector cm = case2_c_from_qbar(P, qm, P.c);
        TruncatedSeries A = TruncatedSeries(Center::AtZero, W, {}, false);
        for (int k = 1; k <= N; ++k)
            A = A + TruncatedSeries::monomial(Center::AtZero, -k,
                        (cp[static_cast<std::size_t>(k - 1)] - cm[static_cast<std::size_t>(k - 1)]) / (2.0 * h))
                        .truncated_to(W);
        const TruncatedSeries U = compose(scale(mul(A, invert(B, W)), -1.0), pbar);
        for (int m = 0; m <= N; ++m) {
            const cplx expected = (m == n) ? cplx(1.0) : cplx(0.0);
            worst_c = std::max(worst_c, std::abs(U.coeff_of_w(m) - expected));
        }
    }
    const bool ok = worst_q < 1e-10 && worst_c < 1e-6;
    report(8, "Case II structural anchors: exp(N qbar_N) product and the qbar asymptotics",
           ok, "product error " + fmt(worst_q) + ", coefficient error " + fmt(worst_c));
}

void criterion9() {
    const GeometryResiduals dz = geometry_residuals(dz_k3(), 1e-5);
    const GeometryResiduals al = geometry_residuals(ablowitz_ladik(), 1e-5);
    report(9, "flatness sum (DZ subfamily kappa=1, N=1, M=3)", dz.flatness_sum < 1e-5,
           "DZ fixture " + fmt(dz.flatness_sum) + " (expected < 1e-5)");
    report(9, "flatness sum raw value for a non-DZ model", true,
           "Ablowitz-Ladik " + fmt(al.flatness_sum), false);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (failures > 0) {
        std::printf("%d criterion check(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
