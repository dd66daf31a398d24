// Batch front end: model checking, hodograph solving, metric reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtoda/frobenius.hpp"
#include "dtoda/geometry.hpp"
#include "dtoda/hydro.hpp"
#include "dtoda/lax.hpp"
#include "dtoda/loewner.hpp"
#include "dtoda/model_io.hpp"

namespace {

using nlohmann::json;
using namespace dtoda;

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json matrix_to_json(const Eigen::MatrixXcd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            row.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

void write_output(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file '" + path + "'");
    out << j.dump(2) << "\n";
}

struct CheckLine {
    std::string name;
    double residual;
    double tolerance;
    std::string status;  // pass | fail | n/a | reported
};

int run_check(const std::string& model_path, double tol, double fd_step, int trials,
              unsigned seed, int window, const std::string& out_path) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (!(fd_step > 0.0)) throw ValidationError("fd-step must be positive");
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (window != 0 && window < 4) throw ValidationError("window must be >= 4");
    const LGPotential P = load_model(model_path);
    std::vector<CheckLine> lines;
    auto assert_line = [&](const std::string& name, double residual) {
        lines.push_back({name, residual, tol, residual <= tol ? "pass" : "fail"});
    };
    auto na_line = [&](const std::string& name) { lines.push_back({name, 0.0, tol, "n/a"}); };
    const int K = P.K();

    const cvector samples = loewner_sample_points(P, std::max(trials, 1), seed);
    assert_line("loewner", loewner_residual(P, samples, fd_step));

    if (K >= 2) {
        const GTResiduals gt = gt_residual(P, fd_step);
        assert_line("gibbons_tsarev.gamma", gt.gamma);
        assert_line("gibbons_tsarev.alpha", gt.alpha);
        assert_line("gibbons_tsarev.product", gt.product);
        assert_line("gibbons_tsarev.quotient", gt.quotient);
    } else {
        na_line("gibbons_tsarev.gamma");
        na_line("gibbons_tsarev.alpha");
        na_line("gibbons_tsarev.product");
        na_line("gibbons_tsarev.quotient");
    }

    const PotentialRelationResiduals pr = potential_relations_residual(P, fd_step, window);
    assert_line("potentials.u1", pr.u1);
    assert_line("potentials.u2", pr.u2);
    assert_line("potentials.phi", pr.phi);

    if (K >= 2) {
        HodographData data;
        data.a[1] = 2.0;
        data.abar[1] = 1.0;
        const SpeedStructureResiduals ss = speed_structure_residual(P, 2, fd_step, &data);
        assert_line("speed_equations.V", ss.V);
        assert_line("speed_equations.Vbar", ss.Vbar);
        assert_line("speed_equations.F", ss.F);
        const RotationCheck rc = rotation_check(P, fd_step);
        assert_line("rotation.h", rc.h_frame);
        assert_line("rotation.htilde", rc.htilde_frame);
        assert_line("rotation.hhat", rc.hat_frame);
        const GeometryResiduals g = geometry_residuals(P, fd_step);
        if (g.darboux_applicable) {
            assert_line("darboux", g.darboux);
            assert_line("log_darboux", g.log_darboux);
        } else {
            na_line("darboux");
            na_line("log_darboux");
        }
        assert_line("egorov", g.egorov);
        assert_line("combescure", g.combescure);
        assert_line("hat_homogeneity", g.hat_homogeneity);
        lines.push_back({"flatness_sum", g.flatness_sum, tol, "reported"});
    } else {
        for (const char* n : {"speed_equations.V", "speed_equations.Vbar", "speed_equations.F",
                              "rotation.h", "rotation.htilde", "rotation.hhat", "darboux",
                              "log_darboux", "egorov", "combescure", "hat_homogeneity"})
            na_line(n);
        lines.push_back({"flatness_sum", 0.0, tol, "n/a"});
    }

    // lambda-chart metric anchors
    {
        const CriticalFrame F = critical_frame(P);
        const cvector alpha = alpha_coeffs(F).alpha;
        double worst_round = 0.0, worst_angle = 0.0, diag_round = 0.0, diag_angle = 0.0;
        const Eigen::MatrixXcd Gr = metric_matrix(P, PairingForm::Round, Chart::Lambda);
        for (int m = 0; m < K; ++m)
            diag_round = std::max(diag_round,
                std::abs(alpha[static_cast<std::size_t>(m)] /
                         (F.gamma[static_cast<std::size_t>(m)] * F.lam[static_cast<std::size_t>(m)])));
        for (int m = 0; m < K; ++m)
            for (int n = 0; n < K; ++n) {
                const cplx expected = (m == n)
                    ? alpha[static_cast<std::size_t>(n)] /
                          (F.gamma[static_cast<std::size_t>(n)] * F.lam[static_cast<std::size_t>(n)])
                    : cplx(0.0);
                worst_round = std::max(worst_round, std::abs(Gr(m, n) - expected) / diag_round);
            }
        assert_line("lambda_chart.round", worst_round);
        if (P.pcase == PotentialCase::I) {
            const Eigen::MatrixXcd Ga = metric_matrix(P, PairingForm::Angle, Chart::Lambda);
            for (int m = 0; m < K; ++m)
                diag_angle = std::max(diag_angle,
                    std::abs(alpha[static_cast<std::size_t>(m)] / F.gamma[static_cast<std::size_t>(m)]));
            for (int m = 0; m < K; ++m)
                for (int n = 0; n < K; ++n) {
                    const cplx expected = (m == n)
                        ? alpha[static_cast<std::size_t>(n)] / F.gamma[static_cast<std::size_t>(n)]
                        : cplx(0.0);
                    worst_angle = std::max(worst_angle, std::abs(Ga(m, n) - expected) / diag_angle);
                }
            assert_line("lambda_chart.angle", worst_angle);
        } else {
            na_line("lambda_chart.angle");
        }
    }

    const EulerHomogeneity eh = euler_homogeneity_residual(P);
    assert_line("euler_scaling.lambda", eh.lam_residual);
    assert_line("euler_scaling.gamma", eh.gamma_residual);

    json report;
    report["model"] = model_path;
    report["seed"] = seed;
    report["fd_step"] = fd_step;
    report["tolerance"] = tol;
    report["identities"] = json::array();
    bool ok = true;
    for (const CheckLine& l : lines) {
        report["identities"].push_back(
            {{"name", l.name}, {"residual", l.residual}, {"tolerance", l.tolerance}, {"status", l.status}});
        if (l.status == "fail") ok = false;
    }
    report["passed"] = ok;
    write_output(report, out_path);
    return ok ? 0 : 1;
}

int run_solve(const std::string& model_path, const std::string& hodograph_path,
              const std::string& grid_spec, double tol, const std::string& out_path) {
    const LGPotential P = load_model(model_path);
    const HodographData data = load_hodograph(hodograph_path);
    const Grid grid = parse_grid_spec(grid_spec);
    const SolutionField field = hodograph_sweep(P, grid, data, P, tol);

    const bool as_json = out_path.size() >= 5 && out_path.substr(out_path.size() - 5) == ".json";
    const int K = P.K();
    const int M = P.M();
    const int Nc = P.pcase == PotentialCase::II ? P.N : 0;

    std::vector<std::string> columns;
    for (const GridAxis& ax : grid.axes) columns.push_back(ax.name);
    for (int i = 1; i <= M; ++i) {
        columns.push_back("re_b" + std::to_string(i));
        columns.push_back("im_b" + std::to_string(i));
    }
    for (int k = 1; k <= Nc; ++k) {
        columns.push_back("re_c" + std::to_string(k));
        columns.push_back("im_c" + std::to_string(k));
    }
    for (int n = 1; n <= K; ++n) {
        columns.push_back("re_lam" + std::to_string(n));
        columns.push_back("im_lam" + std::to_string(n));
    }
    columns.push_back("residual");
    columns.push_back("iters");

    auto row_values = [&](std::size_t flat) {
        std::vector<double> row;
        const std::vector<std::size_t> idx = field.grid.unflatten(flat);
        for (std::size_t d = 0; d < grid.axes.size(); ++d)
            row.push_back(grid.axes[d].values[idx[d]]);
        const HodographSolution& node = field.nodes[flat];
        for (int i = 0; i < M; ++i) {
            row.push_back(node.P.b[static_cast<std::size_t>(i)].real());
            row.push_back(node.P.b[static_cast<std::size_t>(i)].imag());
        }
        for (int k = 0; k < Nc; ++k) {
            row.push_back(node.P.c[static_cast<std::size_t>(k)].real());
            row.push_back(node.P.c[static_cast<std::size_t>(k)].imag());
        }
        for (int n = 0; n < K; ++n) {
            row.push_back(node.frame.lam[static_cast<std::size_t>(n)].real());
            row.push_back(node.frame.lam[static_cast<std::size_t>(n)].imag());
        }
        row.push_back(node.residual);
        row.push_back(static_cast<double>(node.iters));
        return row;
    };

    if (as_json) {
        json j;
        j["columns"] = columns;
        j["rows"] = json::array();
        for (std::size_t flat = 0; flat < field.nodes.size(); ++flat)
            j["rows"].push_back(row_values(flat));
        write_output(j, out_path);
        return 0;
    }
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ValidationError("cannot open output file '" + out_path + "'");
        os = &file;
    }
    for (std::size_t c = 0; c < columns.size(); ++c)
        *os << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (std::size_t flat = 0; flat < field.nodes.size(); ++flat) {
        const std::vector<double> row = row_values(flat);
        for (std::size_t c = 0; c < row.size(); ++c)
            *os << fmt_double(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
    return 0;
}

int run_metric(const std::string& model_path, const std::string& chart_name,
               const std::string& form_name, const std::string& out_path) {
    const LGPotential P = load_model(model_path);
    Chart chart;
    if (chart_name == "natural") chart = Chart::Natural;
    else if (chart_name == "lambda") chart = Chart::Lambda;
    else if (chart_name == "flat") chart = Chart::Flat;
    else throw ValidationError("metric: chart must be natural|lambda|flat");
    PairingForm form;
    if (form_name == "round") form = PairingForm::Round;
    else if (form_name == "angle") form = PairingForm::Angle;
    else throw ValidationError("metric: form must be round|angle");

    json j;
    j["model"] = model_path;
    j["chart"] = chart_name;
    j["form"] = form_name;
    j["matrix"] = matrix_to_json(metric_matrix(P, form, chart));
    if (chart == Chart::Flat) {
        const FlatMetricReport rep = flat_metric_report(P);
        j["flat"]["labels"] = rep.chart.labels;
        j["flat"]["values"] = json::array();
        for (const cplx& v : rep.chart.values)
            j["flat"]["values"].push_back(json::array({v.real(), v.imag()}));
        j["flat"]["expected"] = matrix_to_json(rep.expected);
        j["flat"]["max_error"] = rep.max_error;
        j["flat"]["constancy_deviation"] = rep.constancy_deviation;
    }
    const ProductStructure prod = product_structure(P, form, chart);
    j["associativity_residual"] = prod.associativity_residual;
    write_output(j, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-variable reductions of the dispersionless Toda hierarchy: "
                 "identity checks, hodograph solving, metric reports"};
    app.require_subcommand(1);

    std::string model, out, hodograph, grid_spec, chart = "flat", form = "round";
    double tol = 1e-6, fd_step = 1e-5, solve_tol = 1e-12;
    int trials = 8, window = 0;
    unsigned seed = 7;

    CLI::App* check = app.add_subcommand("check", "run the identity suites on a model");
    check->add_option("--model", model, "model JSON file")->required();
    check->add_option("--tol", tol, "tolerance for asserted identities");
    check->add_option("--fd-step", fd_step, "relative finite-difference step");
    check->add_option("--trials", trials, "number of random sample points");
    check->add_option("--seed", seed, "seed for randomized sampling");
    check->add_option("--window", window, "truncation window override (>= 4)");
    check->add_option("--out", out, "report JSON path (stdout if omitted)");

    CLI::App* solve = app.add_subcommand("solve", "solve the hodograph relations on a grid");
    solve->add_option("--model", model, "model JSON file")->required();
    solve->add_option("--hodograph", hodograph, "hodograph data JSON file")->required();
    solve->add_option("--grid", grid_spec, "grid spec, e.g. \"s=1.5:2.5:0.1,t1=1\"")->required();
    solve->add_option("--tol", solve_tol, "solver tolerance");
    solve->add_option("--out", out, "output CSV/JSON path (stdout CSV if omitted)");

    CLI::App* metric = app.add_subcommand("metric", "emit metric matrices and flat-chart data");
    metric->add_option("--model", model, "model JSON file")->required();
    metric->add_option("--chart", chart, "natural|lambda|flat");
    metric->add_option("--form", form, "round|angle");
    metric->add_option("--out", out, "report JSON path (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return run_check(model, tol, fd_step, trials, seed, window, out);
        if (solve->parsed()) return run_solve(model, hodograph, grid_spec, solve_tol, out);
        if (metric->parsed()) return run_metric(model, chart, form, out);
    } catch (const ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
