#include "dtoda/hydro.hpp"

#include <algorithm>
#include <cmath>

namespace dtoda {

cvector speeds(const LGPotential& P, const CriticalFrame& F, FlowIndex flow,
               const cplx* phi_ref) {
    TruncatedSeries B = generator(P, flow.side, flow.n, -1, phi_ref);
    TruncatedSeries Bp = B.derivative_p();
    const int K = static_cast<int>(F.gamma.size());
    cvector v(static_cast<std::size_t>(K));
    for (int n = 0; n < K; ++n) {
        const cplx g = F.gamma[static_cast<std::size_t>(n)];
        v[static_cast<std::size_t>(n)] = g * Bp.eval_at(g);
    }
    return v;
}

cvector hodograph_F(const LGPotential& P, const CriticalFrame& F,
                    const HodographData& data, const cplx* phi_ref) {
    const int K = static_cast<int>(F.gamma.size());
    cvector out(static_cast<std::size_t>(K), data.a0);
    for (const auto& [k, coeff] : data.a) {
        const cvector v = speeds(P, F, {LaxSide::ZAtInfinity, k}, phi_ref);
        for (int n = 0; n < K; ++n) out[static_cast<std::size_t>(n)] += coeff * v[static_cast<std::size_t>(n)];
    }
    for (const auto& [k, coeff] : data.abar) {
        const cvector v = speeds(P, F, {LaxSide::ZbarAtZero, k}, phi_ref);
        for (int n = 0; n < K; ++n) out[static_cast<std::size_t>(n)] += coeff * v[static_cast<std::size_t>(n)];
    }
    return out;
}

cvector hodograph_residual(const LGPotential& P, const CriticalFrame& F,
                           const SpaceTimePoint& pt, const HodographData& data,
                           const cplx* phi_ref) {
    const int K = static_cast<int>(F.gamma.size());
    cvector r(static_cast<std::size_t>(K), cplx(pt.s, 0.0));
    for (const auto& [k, tk] : pt.t) {
        if (tk == 0.0) continue;
        const cvector v = speeds(P, F, {LaxSide::ZAtInfinity, k});
        for (int n = 0; n < K; ++n) r[static_cast<std::size_t>(n)] += tk * v[static_cast<std::size_t>(n)];
    }
    for (const auto& [k, tk] : pt.tbar) {
        if (tk == 0.0) continue;
        const cvector v = speeds(P, F, {LaxSide::ZbarAtZero, k}, phi_ref);
        for (int n = 0; n < K; ++n) r[static_cast<std::size_t>(n)] += tk * v[static_cast<std::size_t>(n)];
    }
    const cvector f = hodograph_F(P, F, data, phi_ref);
    for (int n = 0; n < K; ++n) r[static_cast<std::size_t>(n)] -= f[static_cast<std::size_t>(n)];
    return r;
}

namespace {

double scale_of(const SpaceTimePoint& pt, const HodographData& data, const cvector& lam) {
    double s = std::abs(pt.s) + std::abs(data.a0) + max_abs(lam);
    return std::max(s, 1.0);
}

}  // namespace

HodographSolution hodograph_solve(const LGPotential& tpl, const SpaceTimePoint& pt,
                                  const HodographData& data, const LGPotential& guess,
                                  double tol, int max_iter) {
    CriticalFrame F = critical_frame(guess);
    LGPotential P = guess;
    const int K = tpl.K();
    Eigen::VectorXcd lambda(K);
    for (int n = 0; n < K; ++n) lambda(n) = F.lam[static_cast<std::size_t>(n)];

    // pin the zbar branch along the whole Newton path
    const bool needs_zbar = !data.abar.empty() || !pt.tbar.empty();
    cplx phi_anchor = 0.0;
    const cplx* phi_ref = nullptr;
    if (needs_zbar) {
        phi_anchor = expand_lax(guess, LaxSide::ZbarAtZero, tpl.K() + 6).phi;
        phi_ref = &phi_anchor;
    }

    auto residual_at = [&](const Eigen::VectorXcd& lam, LGPotential& Pout, CriticalFrame& Fout) {
        const InversionResult inv = params_from_lambda(tpl, lam, Pout, 1e-13);
        Pout = inv.P;
        Fout = inv.frame;
        cvector r = hodograph_residual(Pout, Fout, pt, data, phi_ref);
        Eigen::VectorXcd rv(K);
        for (int n = 0; n < K; ++n) rv(n) = r[static_cast<std::size_t>(n)];
        return rv;
    };

    const double rscale = scale_of(pt, data, F.lam);
    const double lscale = std::max(max_abs(F.lam), 1.0);
    Eigen::VectorXcd r = residual_at(lambda, P, F);
    double rnorm = r.cwiseAbs().maxCoeff();

    auto jacobian_at = [&](const Eigen::VectorXcd& lam) {
        Eigen::MatrixXcd J(K, K);
        const double h = 1e-6 * lscale;
        for (int m = 0; m < K; ++m) {
            LGPotential Pp = P, Pm = P;
            CriticalFrame Fp = F, Fm = F;
            Eigen::VectorXcd lp = lam, lm = lam;
            lp(m) += h;
            lm(m) -= h;
            const Eigen::VectorXcd rp = residual_at(lp, Pp, Fp);
            const Eigen::VectorXcd rm = residual_at(lm, Pm, Fm);
            J.col(m) = (rp - rm) / (2.0 * h);
        }
        return J;
    };

    int iters = 0;
    for (int it = 0; it < max_iter && rnorm > tol * rscale; ++it) {
        Eigen::MatrixXcd J = jacobian_at(lambda);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
        if (!(lu.rcond() > 1e-12))
            throw NumericalError("hodograph_solve: the non-degeneracy condition fails (singular Jacobian)");
        Eigen::VectorXcd step = lu.solve(r);
        double factor = 1.0;
        bool accepted = false;
        for (int half = 0; half <= 6 && !accepted; ++half, factor *= 0.5) {
            try {
                LGPotential Ptry = P;
                CriticalFrame Ftry = F;
                Eigen::VectorXcd ltry = lambda - factor * step;
                Eigen::VectorXcd rtry = residual_at(ltry, Ptry, Ftry);
                const double ntry = rtry.cwiseAbs().maxCoeff();
                if (ntry < rnorm) {
                    lambda = ltry;
                    P = Ptry;
                    F = Ftry;
                    r = rtry;
                    rnorm = ntry;
                    accepted = true;
                }
            } catch (const NumericalError&) {
                // frame collision along the path: shorten the step
            }
        }
        if (!accepted)
            throw NumericalError("hodograph_solve: step rejected repeatedly (frame collision along the path)");
        iters = it + 1;
    }
    if (rnorm > tol * rscale)
        throw NumericalError("hodograph_solve: Newton did not converge");
    // non-degeneracy must hold at the solution even if the entry point solved
    {
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(jacobian_at(lambda));
        if (!(lu.rcond() > 1e-12))
            throw NumericalError("hodograph_solve: the non-degeneracy condition fails (singular Jacobian)");
    }
    return {P, F, lambda, iters, rnorm};
}

HodographData make_seed_data(const LGPotential& ref, const SpaceTimePoint& anchor,
                             const std::vector<FlowIndex>& active_terms) {
    const CriticalFrame F = critical_frame(ref);
    const int K = static_cast<int>(F.gamma.size());
    const int ncoef = 1 + static_cast<int>(active_terms.size());
    Eigen::MatrixXcd A(K, ncoef);
    Eigen::VectorXcd rhs(K);
    for (int n = 0; n < K; ++n) A(n, 0) = 1.0;
    for (int j = 0; j < static_cast<int>(active_terms.size()); ++j) {
        const cvector v = speeds(ref, F, active_terms[static_cast<std::size_t>(j)]);
        for (int n = 0; n < K; ++n) A(n, j + 1) = v[static_cast<std::size_t>(n)];
    }
    cvector base = hodograph_residual(ref, F, anchor, HodographData{});
    for (int n = 0; n < K; ++n) rhs(n) = base[static_cast<std::size_t>(n)];
    Eigen::VectorXcd x = A.colPivHouseholderQr().solve(rhs);
    if ((A * x - rhs).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
        throw NumericalError("make_seed_data: anchor conditions are not solvable by the requested terms");
    HodographData data;
    data.a0 = x(0);
    for (int j = 0; j < static_cast<int>(active_terms.size()); ++j) {
        const FlowIndex f = active_terms[static_cast<std::size_t>(j)];
        if (f.side == LaxSide::ZAtInfinity)
            data.a[f.n] += x(j + 1);
        else
            data.abar[f.n] += x(j + 1);
    }
    return data;
}

std::size_t Grid::size() const {
    std::size_t n = 1;
    for (const GridAxis& ax : axes) n *= ax.values.size();
    return n;
}

std::vector<std::size_t> Grid::unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t d = axes.size(); d-- > 0;) {
        idx[d] = flat % axes[d].values.size();
        flat /= axes[d].values.size();
    }
    return idx;
}

std::size_t Grid::flatten(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < axes.size(); ++d) flat = flat * axes[d].values.size() + idx[d];
    return flat;
}

int Grid::axis_index(const std::string& name) const {
    for (std::size_t d = 0; d < axes.size(); ++d)
        if (axes[d].name == name) return static_cast<int>(d);
    return -1;
}

void apply_axis(SpaceTimePoint& pt, const std::string& name, double value) {
    if (name == "s") {
        pt.s = value;
    } else if (name.rfind("tbar", 0) == 0) {
        pt.tbar[std::stoi(name.substr(4))] = value;
    } else if (name.rfind("t", 0) == 0) {
        pt.t[std::stoi(name.substr(1))] = value;
    } else {
        throw ValidationError("unknown grid axis '" + name + "'");
    }
}

SpaceTimePoint Grid::point(std::size_t flat) const {
    SpaceTimePoint pt;
    const std::vector<std::size_t> idx = unflatten(flat);
    for (std::size_t d = 0; d < axes.size(); ++d)
        apply_axis(pt, axes[d].name, axes[d].values[idx[d]]);
    return pt;
}

namespace {

std::string describe(const SpaceTimePoint& pt) {
    std::string s = "s=" + std::to_string(pt.s);
    for (const auto& [k, v] : pt.t) s += ", t" + std::to_string(k) + "=" + std::to_string(v);
    for (const auto& [k, v] : pt.tbar) s += ", tbar" + std::to_string(k) + "=" + std::to_string(v);
    return s;
}

SpaceTimePoint interpolate(const SpaceTimePoint& a, const SpaceTimePoint& b, double w) {
    SpaceTimePoint pt;
    pt.s = (1.0 - w) * a.s + w * b.s;
    for (const auto& [k, v] : a.t) pt.t[k] = (1.0 - w) * v;
    for (const auto& [k, v] : b.t) pt.t[k] += w * v;
    for (const auto& [k, v] : a.tbar) pt.tbar[k] = (1.0 - w) * v;
    for (const auto& [k, v] : b.tbar) pt.tbar[k] += w * v;
    return pt;
}

// Newton with segment continuation between two space-time points.
HodographSolution continue_to(const LGPotential& tpl, const SpaceTimePoint& from,
                              const SpaceTimePoint& to, const HodographData& data,
                              const LGPotential& guess, double tol) {
    LGPotential cur = guess;
    double lo = 0.0;
    int halvings = 0;
    while (true) {
        double hi = 1.0;
        bool advanced = false;
        while (hi > lo + 1e-12) {
            try {
                HodographSolution sol = hodograph_solve(tpl, interpolate(from, to, hi), data, cur, tol);
                cur = sol.P;
                lo = hi;
                advanced = true;
                if (lo >= 1.0) return sol;
                break;
            } catch (const NumericalError&) {
                hi = lo + 0.5 * (hi - lo);
                if (++halvings > 6)
                    throw NumericalError("hodograph_sweep: continuation breakdown; last good point " +
                                         describe(interpolate(from, to, lo)));
            }
        }
        if (!advanced)
            throw NumericalError("hodograph_sweep: continuation breakdown; last good point " +
                                 describe(interpolate(from, to, lo)));
    }
}

}  // namespace

SolutionField hodograph_sweep(const LGPotential& tpl, const Grid& grid,
                              const HodographData& data, const LGPotential& seed,
                              double tol) {
    SolutionField field;
    field.grid = grid;
    field.data = data;
    const std::size_t n = grid.size();
    field.nodes.reserve(n);
    for (std::size_t flat = 0; flat < n; ++flat) {
        const SpaceTimePoint pt = grid.point(flat);
        if (flat == 0) {
            field.nodes.push_back(hodograph_solve(tpl, pt, data, seed, tol));
            continue;
        }
        // predecessor: previous index along the last non-initial axis
        std::vector<std::size_t> idx = grid.unflatten(flat);
        std::size_t pred = flat;
        for (std::size_t d = idx.size(); d-- > 0;) {
            if (idx[d] > 0) {
                std::vector<std::size_t> pidx = idx;
                --pidx[d];
                pred = grid.flatten(pidx);
                break;
            }
        }
        const HodographSolution& prev = field.nodes[pred];
        try {
            field.nodes.push_back(hodograph_solve(tpl, pt, data, prev.P, tol));
        } catch (const NumericalError&) {
            field.nodes.push_back(continue_to(tpl, grid.point(pred), pt, data, prev.P, tol));
        }
    }
    return field;
}

namespace {

std::string flow_axis_name(FlowIndex flow) {
    return (flow.side == LaxSide::ZAtInfinity ? "t" : "tbar") + std::to_string(flow.n);
}

}  // namespace

double pde_residual(const SolutionField& field, FlowIndex flow) {
    const Grid& g = field.grid;
    const int ds = g.axis_index("s");
    const int dt = g.axis_index(flow_axis_name(flow));
    if (ds < 0 || dt < 0 || g.axes[static_cast<std::size_t>(ds)].values.size() < 3 ||
        g.axes[static_cast<std::size_t>(dt)].values.size() < 3)
        throw NumericalError("pde_residual: grid lacks a 3-point stencil in s and the flow time");
    const int K = static_cast<int>(field.nodes.front().frame.gamma.size());
    double worst = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::vector<std::size_t> idx = g.unflatten(flat);
        if (idx[static_cast<std::size_t>(ds)] == 0 ||
            idx[static_cast<std::size_t>(ds)] + 1 == g.axes[static_cast<std::size_t>(ds)].values.size())
            continue;
        if (idx[static_cast<std::size_t>(dt)] == 0 ||
            idx[static_cast<std::size_t>(dt)] + 1 == g.axes[static_cast<std::size_t>(dt)].values.size())
            continue;
        auto shifted = [&](int axis, int delta) {
            std::vector<std::size_t> j = idx;
            j[static_cast<std::size_t>(axis)] += static_cast<std::size_t>(delta);
            return g.flatten(j);
        };
        const auto& node = field.nodes[flat];
        const double hs = (g.axes[static_cast<std::size_t>(ds)].values[idx[static_cast<std::size_t>(ds)] + 1] -
                           g.axes[static_cast<std::size_t>(ds)].values[idx[static_cast<std::size_t>(ds)] - 1]) / 2.0;
        const double ht = (g.axes[static_cast<std::size_t>(dt)].values[idx[static_cast<std::size_t>(dt)] + 1] -
                           g.axes[static_cast<std::size_t>(dt)].values[idx[static_cast<std::size_t>(dt)] - 1]) / 2.0;
        const cvector v = speeds(node.P, node.frame, flow);
        const auto& sp = field.nodes[shifted(ds, +1)].frame.lam;
        const auto& sm = field.nodes[shifted(ds, -1)].frame.lam;
        const auto& tp = field.nodes[shifted(dt, +1)].frame.lam;
        const auto& tm = field.nodes[shifted(dt, -1)].frame.lam;
        for (int n = 0; n < K; ++n) {
            const cplx dlam_dt = (tp[static_cast<std::size_t>(n)] - tm[static_cast<std::size_t>(n)]) / (2.0 * ht);
            const cplx dlam_ds = (sp[static_cast<std::size_t>(n)] - sm[static_cast<std::size_t>(n)]) / (2.0 * hs);
            const cplx rhs = v[static_cast<std::size_t>(n)] * dlam_ds;
            const double denom = std::max({std::abs(dlam_dt), std::abs(rhs), 1e-9});
            worst = std::max(worst, std::abs(dlam_dt - rhs) / denom);
        }
    }
    return worst;
}

double lax_flow_residual(const SolutionField& field, FlowIndex flow,
                         const cvector& p_samples) {
    const Grid& g = field.grid;
    const int ds = g.axis_index("s");
    const int dt = g.axis_index(flow_axis_name(flow));
    if (ds < 0 || dt < 0 || g.axes[static_cast<std::size_t>(ds)].values.size() < 3 ||
        g.axes[static_cast<std::size_t>(dt)].values.size() < 3)
        throw NumericalError("lax_flow_residual: grid lacks a 3-point stencil in s and the flow time");
    double worst = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::vector<std::size_t> idx = g.unflatten(flat);
        if (idx[static_cast<std::size_t>(ds)] == 0 ||
            idx[static_cast<std::size_t>(ds)] + 1 == g.axes[static_cast<std::size_t>(ds)].values.size())
            continue;
        if (idx[static_cast<std::size_t>(dt)] == 0 ||
            idx[static_cast<std::size_t>(dt)] + 1 == g.axes[static_cast<std::size_t>(dt)].values.size())
            continue;
        auto node_at = [&](int axis, int delta) -> const HodographSolution& {
            std::vector<std::size_t> j = idx;
            j[static_cast<std::size_t>(axis)] += static_cast<std::size_t>(delta);
            return field.nodes[g.flatten(j)];
        };
        const HodographSolution& node = field.nodes[flat];
        const double hs = (g.axes[static_cast<std::size_t>(ds)].values[idx[static_cast<std::size_t>(ds)] + 1] -
                           g.axes[static_cast<std::size_t>(ds)].values[idx[static_cast<std::size_t>(ds)] - 1]) / 2.0;
        const double ht = (g.axes[static_cast<std::size_t>(dt)].values[idx[static_cast<std::size_t>(dt)] + 1] -
                           g.axes[static_cast<std::size_t>(dt)].values[idx[static_cast<std::size_t>(dt)] - 1]) / 2.0;

        const LGPotential& P = node.P;
        cplx phi_ref = 0.0;
        const cplx* ref = nullptr;
        if (flow.side == LaxSide::ZbarAtZero) {
            phi_ref = expand_lax(P, LaxSide::ZbarAtZero, flow.n + P.K() + 4).phi;
            ref = &phi_ref;
        }
        const LGPotential& Psp = node_at(ds, +1).P;
        const LGPotential& Psm = node_at(ds, -1).P;
        const LGPotential& Ptp = node_at(dt, +1).P;
        const LGPotential& Ptm = node_at(dt, -1).P;

        TruncatedSeries B = generator(P, flow.side, flow.n, -1, ref);
        TruncatedSeries Bprime = B.derivative_p();
        TruncatedSeries dBds = scale(sub(generator(Psp, flow.side, flow.n, -1, ref),
                                         generator(Psm, flow.side, flow.n, -1, ref)),
                                     1.0 / (2.0 * hs));

        for (const cplx& p : p_samples) {
            const cplx dlog_dt = dlog_lambda_between(Ptp, Ptm, p) / (2.0 * ht);
            const cplx dlog_ds = dlog_lambda_between(Psp, Psm, p) / (2.0 * hs);
            const cplx bracket = p * (Bprime.eval_at(p) * dlog_ds -
                                      dBds.eval_at(p) * log_derivatives(P, p).first);
            const double denom = std::max({std::abs(dlog_dt), std::abs(bracket), 1e-9});
            worst = std::max(worst, std::abs(dlog_dt - bracket) / denom);
        }
    }
    return worst;
}

SpeedStructureResiduals speed_structure_residual(const LGPotential& P, int k, double h,
                                                 const HodographData* data) {
    SpeedStructureResiduals out;
    LambdaChart chart(P);
    const int K = chart.K();
    if (K < 2) return out;
    cplx phi_ref = expand_lax(P, LaxSide::ZbarAtZero, k + P.K() + 4).phi;

    const cvector V = speeds(P, chart.frame(), {LaxSide::ZAtInfinity, k});
    const cvector Vb = speeds(P, chart.frame(), {LaxSide::ZbarAtZero, k}, &phi_ref);
    const cvector Fd = data ? hodograph_F(P, chart.frame(), *data, &phi_ref) : cvector{};

    auto rel = [](cplx fd, cplx formula, double mag) {
        const double denom = std::max({std::abs(formula), std::abs(fd), 1e-9 * mag, 1e-300});
        return std::abs(fd - formula) / denom;
    };
    const double vmag = max_abs(V), vbmag = max_abs(Vb);
    const double fmag = data ? max_abs(Fd) : 0.0;

    for (int m = 0; m < K; ++m) {
        const double step = chart.step_for(m, h);
        const InversionResult plus = chart.shifted(m, step);
        const InversionResult minus = chart.shifted(m, -step);
        const cvector Vp = speeds(plus.P, plus.frame, {LaxSide::ZAtInfinity, k});
        const cvector Vm = speeds(minus.P, minus.frame, {LaxSide::ZAtInfinity, k});
        const cvector Vbp = speeds(plus.P, plus.frame, {LaxSide::ZbarAtZero, k}, &phi_ref);
        const cvector Vbm = speeds(minus.P, minus.frame, {LaxSide::ZbarAtZero, k}, &phi_ref);
        const cvector Fp = data ? hodograph_F(plus.P, plus.frame, *data, &phi_ref) : cvector{};
        const cvector Fm = data ? hodograph_F(minus.P, minus.frame, *data, &phi_ref) : cvector{};
        for (int n = 0; n < K; ++n) {
            if (n == m) continue;
            const cplx gm = chart.frame().gamma[static_cast<std::size_t>(m)];
            const cplx gn = chart.frame().gamma[static_cast<std::size_t>(n)];
            const cplx rhs = chart.alpha()[static_cast<std::size_t>(m)] * gn / ((gm - gn) * (gm - gn));
            const cplx dV = (Vp[static_cast<std::size_t>(n)] - Vm[static_cast<std::size_t>(n)]) / (2.0 * step);
            const cplx dVb = (Vbp[static_cast<std::size_t>(n)] - Vbm[static_cast<std::size_t>(n)]) / (2.0 * step);
            out.V = std::max(out.V, rel(dV / (V[static_cast<std::size_t>(m)] - V[static_cast<std::size_t>(n)]), rhs, std::abs(rhs) + vmag));
            out.Vbar = std::max(out.Vbar, rel(dVb / (Vb[static_cast<std::size_t>(m)] - Vb[static_cast<std::size_t>(n)]), rhs, std::abs(rhs) + vbmag));
            if (data) {
                const cplx dF = (Fp[static_cast<std::size_t>(n)] - Fm[static_cast<std::size_t>(n)]) / (2.0 * step);
                out.F = std::max(out.F, rel(dF / (Fd[static_cast<std::size_t>(m)] - Fd[static_cast<std::size_t>(n)]), rhs, std::abs(rhs) + fmag));
            }
        }
    }
    return out;
}

}  // namespace dtoda
