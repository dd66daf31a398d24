#include "dtoda/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dtoda {

namespace {

constexpr int kInfUpper = std::numeric_limits<int>::max() / 2;

int upper_or_inf(const TruncatedSeries& s) {
    if (s.is_zero() && s.exact()) return kInfUpper;
    return s.exact() ? kInfUpper : s.upper();
}

}  // namespace

TruncatedSeries::TruncatedSeries(Center center, int lead, cvector coeffs, bool exact)
    : center_(center), lead_(lead), c_(std::move(coeffs)), exact_(exact) {
    normalize();
}

void TruncatedSeries::normalize() {
    std::size_t skip = 0;
    while (skip < c_.size() && c_[skip] == cplx(0.0, 0.0)) ++skip;
    if (skip == c_.size()) {
        // all-zero: windowed zero keeps its order bound through lead
        lead_ = exact_ ? 0 : lead_ + static_cast<int>(c_.size());
        c_.clear();
        return;
    }
    if (skip > 0) {
        c_.erase(c_.begin(), c_.begin() + static_cast<long>(skip));
        lead_ += static_cast<int>(skip);
    }
}

TruncatedSeries TruncatedSeries::zero(Center center) {
    return TruncatedSeries(center, 0, {}, true);
}

TruncatedSeries TruncatedSeries::monomial(Center center, int p_exponent, cplx coeff) {
    int e = (center == Center::AtInfinity) ? -p_exponent : p_exponent;
    return TruncatedSeries(center, e, {coeff}, true);
}

TruncatedSeries TruncatedSeries::from_p_terms(
    Center center, const std::vector<std::pair<int, cplx>>& terms) {
    TruncatedSeries r = zero(center);
    for (const auto& [k, coeff] : terms) r = add(r, monomial(center, k, coeff));
    return r;
}

TruncatedSeries TruncatedSeries::pole_expansion(Center center, cplx b, int length) {
    cvector c(static_cast<std::size_t>(length));
    if (center == Center::AtInfinity) {
        // 1/(p-b) = w + b w^2 + b^2 w^3 + ...
        cplx acc = 1.0;
        for (int j = 0; j < length; ++j) {
            c[static_cast<std::size_t>(j)] = acc;
            acc *= b;
        }
        return TruncatedSeries(center, 1, std::move(c));
    }
    if (b == cplx(0.0, 0.0))
        throw NumericalError("pole_expansion at zero requires b != 0");
    // 1/(p-b) = -1/b - p/b^2 - ...
    cplx acc = -1.0 / b;
    for (int j = 0; j < length; ++j) {
        c[static_cast<std::size_t>(j)] = acc;
        acc /= b;
    }
    return TruncatedSeries(center, 0, std::move(c));
}

int TruncatedSeries::p_exponent(int j) const {
    int e = lead_ + j;
    return (center_ == Center::AtInfinity) ? -e : e;
}

cplx TruncatedSeries::coeff_of_w(int e) const {
    int j = e - lead_;
    if (j < 0 || j >= window()) return 0.0;
    return c_[static_cast<std::size_t>(j)];
}

cplx TruncatedSeries::coeff_of_p(int k) const {
    return coeff_of_w(center_ == Center::AtInfinity ? -k : k);
}

TruncatedSeries TruncatedSeries::truncated_to(int new_upper) const {
    if (is_zero()) return TruncatedSeries(center_, new_upper, {}, false);
    // exact series have known zeros beyond their stored range, so the
    // window may grow; a windowed series can only shrink
    const int limit = exact_ ? new_upper - lead_ : std::min(new_upper - lead_, window());
    const int keep = std::max(limit, 0);
    cvector c(static_cast<std::size_t>(keep), cplx(0.0, 0.0));
    for (int j = 0; j < std::min(keep, window()); ++j) c[static_cast<std::size_t>(j)] = c_[static_cast<std::size_t>(j)];
    return TruncatedSeries(center_, keep > 0 ? lead_ : new_upper, std::move(c), false);
}

cplx TruncatedSeries::eval_at(cplx p) const {
    if (!exact_) throw NumericalError("eval_at requires an exact series");
    cplx w = (center_ == Center::AtInfinity) ? 1.0 / p : p;
    // Horner in w, then the w^lead prefactor.
    cplx acc = 0.0;
    for (std::size_t j = c_.size(); j-- > 0;) acc = acc * w + c_[j];
    return acc * std::pow(w, lead_);
}

TruncatedSeries TruncatedSeries::derivative_p() const {
    if (!exact_) throw NumericalError("derivative_p requires an exact series");
    TruncatedSeries r = zero(center_);
    for (int j = 0; j < window(); ++j) {
        int k = p_exponent(j);
        if (k == 0) continue;
        r = add(r, monomial(center_, k - 1, static_cast<double>(k) * c_[static_cast<std::size_t>(j)]));
    }
    return r;
}

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.center() != b.center())
        throw NumericalError("series center mismatch in add");
    if (a.is_zero() && a.exact()) return b;
    if (b.is_zero() && b.exact()) return a;
    const int up = std::min(upper_or_inf(a), upper_or_inf(b));
    const bool exact = up >= kInfUpper;
    int lo;
    if (a.is_zero()) lo = b.is_zero() ? up : b.lead();
    else if (b.is_zero()) lo = a.lead();
    else lo = std::min(a.lead(), b.lead());
    const int hi = exact ? std::max(a.upper(), b.upper()) : up;
    if (lo >= hi) return TruncatedSeries(a.center(), hi, {}, exact);
    cvector c(static_cast<std::size_t>(hi - lo));
    for (int e = lo; e < hi; ++e)
        c[static_cast<std::size_t>(e - lo)] = a.coeff_of_w(e) + b.coeff_of_w(e);
    return TruncatedSeries(a.center(), lo, std::move(c), exact);
}

TruncatedSeries sub(const TruncatedSeries& a, const TruncatedSeries& b) {
    return add(a, scale(b, -1.0));
}

TruncatedSeries scale(const TruncatedSeries& a, cplx factor) {
    if (factor == cplx(0.0, 0.0))
        return a.exact() ? TruncatedSeries::zero(a.center())
                         : TruncatedSeries(a.center(), a.upper(), {}, false);
    cvector c = a.coeffs();
    for (cplx& z : c) z *= factor;
    return TruncatedSeries(a.center(), a.lead(), std::move(c), a.exact());
}

TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.center() != b.center())
        throw NumericalError("series center mismatch in mul");
    if (a.is_zero() || b.is_zero()) {
        if ((a.is_zero() && a.exact()) || (b.is_zero() && b.exact()))
            return TruncatedSeries::zero(a.center());
        // windowed zero times anything: O(w^ua) * (w^lb * ...) = O(w^(ua+lb))
        const int up = (a.is_zero() ? a.upper() : a.lead()) + (b.is_zero() ? b.upper() : b.lead());
        return TruncatedSeries(a.center(), up, {}, false);
    }
    const int lead = a.lead() + b.lead();
    const bool exact = a.exact() && b.exact();
    int len;
    if (exact) {
        len = a.window() + b.window() - 1;
    } else {
        const int la = a.exact() ? kInfUpper : a.window();
        const int lb = b.exact() ? kInfUpper : b.window();
        len = std::min(la, lb);
    }
    cvector c(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    const cvector& ca = a.coeffs();
    const cvector& cb = b.coeffs();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        if (static_cast<int>(i) >= len) break;
        for (std::size_t j = 0; j < cb.size(); ++j) {
            const std::size_t k = i + j;
            if (static_cast<int>(k) >= len) break;
            c[k] += ca[i] * cb[j];
        }
    }
    return TruncatedSeries(a.center(), lead, std::move(c), exact);
}

TruncatedSeries invert(const TruncatedSeries& a, int length) {
    if (a.is_zero())
        throw NumericalError("cannot invert the zero series");
    if (a.coeffs()[0] == cplx(0.0, 0.0))
        throw NumericalError("cannot invert a series with vanishing leading coefficient");
    int len = length > 0 ? length : (a.exact() ? -1 : a.window());
    if (len <= 0)
        throw NumericalError("invert of an exact series needs an explicit window");
    const cvector& ca = a.coeffs();
    cvector c(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    const cplx inv0 = 1.0 / ca[0];
    c[0] = inv0;
    for (int n = 1; n < len; ++n) {
        cplx acc = 0.0;
        for (int j = 1; j <= n && j < static_cast<int>(ca.size()); ++j)
            acc += ca[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(n - j)];
        c[static_cast<std::size_t>(n)] = -inv0 * acc;
    }
    return TruncatedSeries(a.center(), -a.lead(), std::move(c), false);
}

TruncatedSeries s_exp(const TruncatedSeries& a, int length) {
    if (a.is_zero()) {
        int len = length > 0 ? length : (a.exact() ? 1 : std::max(a.upper(), 1));
        cvector c(static_cast<std::size_t>(len), cplx(0.0, 0.0));
        c[0] = 1.0;
        return TruncatedSeries(a.center(), 0, std::move(c), a.exact() && length <= 0);
    }
    if (a.lead() < 1)
        throw NumericalError("s_exp requires a series vanishing at the center");
    int len = length > 0 ? length : (a.exact() ? -1 : a.upper());
    if (len <= 0)
        throw NumericalError("s_exp of an exact series needs an explicit window");
    // f' = a' f coefficientwise: n f_n = sum_j j a_j f_{n-j}.
    cvector c(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    c[0] = 1.0;
    for (int n = 1; n < len; ++n) {
        cplx acc = 0.0;
        for (int j = 1; j <= n; ++j)
            acc += static_cast<double>(j) * a.coeff_of_w(j) * c[static_cast<std::size_t>(n - j)];
        c[static_cast<std::size_t>(n)] = acc / static_cast<double>(n);
    }
    return TruncatedSeries(a.center(), 0, std::move(c), false);
}

TruncatedSeries s_log(const TruncatedSeries& a, int length) {
    if (a.is_zero() || a.lead() != 0)
        throw NumericalError("s_log requires a series of the form 1 + (vanishing part)");
    if (std::abs(a.coeffs()[0] - cplx(1.0, 0.0)) > 1e-12)
        throw NumericalError("s_log requires unit constant term; normalize first");
    int len = length > 0 ? length : (a.exact() ? -1 : a.upper());
    if (len <= 0)
        throw NumericalError("s_log of an exact series needs an explicit window");
    // g' = a'/a integrated termwise.
    TruncatedSeries da = TruncatedSeries::zero(a.center());
    {
        cvector dc(static_cast<std::size_t>(std::max(len - 1, 1)), cplx(0.0, 0.0));
        for (int j = 1; j < len; ++j)
            dc[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) * a.coeff_of_w(j);
        da = TruncatedSeries(a.center(), 0, std::move(dc), false);
    }
    TruncatedSeries awin = a.exact() ? a.truncated_to(len) : a;
    TruncatedSeries ratio = mul(da, invert(awin, len));
    cvector c(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    for (int n = 1; n < len; ++n)
        c[static_cast<std::size_t>(n)] = ratio.coeff_of_w(n - 1) / static_cast<double>(n);
    return TruncatedSeries(a.center(), 0, std::move(c), false);
}

TruncatedSeries s_pow(const TruncatedSeries& a, double r, int length) {
    TruncatedSeries lg = s_log(a, length);
    return s_exp(scale(lg, r), length > 0 ? length : lg.upper());
}

TruncatedSeries s_powi(const TruncatedSeries& a, int n, int length) {
    if (n == 0) return TruncatedSeries::monomial(a.center(), 0, 1.0);
    TruncatedSeries base = n < 0 ? invert(a, length) : a;
    TruncatedSeries r = base;
    for (int k = 1; k < std::abs(n); ++k) r = mul(r, base);
    return r;
}

std::pair<TruncatedSeries, TruncatedSeries> split_parts(const TruncatedSeries& a) {
    // p-exponent >= 0 <=> w-exponent <= 0 at infinity, >= 0 at zero.
    const bool at_inf = a.center() == Center::AtInfinity;
    auto slice = [&](int wlo, int whi, bool exact) {
        if (a.is_zero() || wlo >= whi)
            return exact ? TruncatedSeries::zero(a.center())
                         : TruncatedSeries(a.center(), whi, {}, false);
        cvector c(static_cast<std::size_t>(whi - wlo));
        for (int e = wlo; e < whi; ++e)
            c[static_cast<std::size_t>(e - wlo)] = a.coeff_of_w(e);
        return TruncatedSeries(a.center(), wlo, std::move(c), exact);
    };
    const int lo = a.lead();
    const int hi = a.upper();
    if (at_inf) {
        // w-exponents <= 0 hold the polynomial part, finitely many of them.
        TruncatedSeries poly = slice(lo, std::min(hi, 1), true);
        TruncatedSeries neg = slice(std::max(lo, 1), hi, a.exact());
        return {poly, neg};
    }
    TruncatedSeries neg = slice(lo, std::min(hi, 0), true);
    TruncatedSeries poly = slice(std::max(lo, 0), hi, a.exact());
    return {poly, neg};
}

TruncatedSeries compose(const TruncatedSeries& f, const TruncatedSeries& g) {
    if (!f.is_zero() && f.lead() < 0)
        throw NumericalError("compose requires f with nonnegative lead");
    if (g.is_zero())
        throw NumericalError("compose requires a nonzero inner series");
    if (g.lead() < 1)
        throw NumericalError("compose requires g vanishing at its center");
    const int len = g.exact() ? g.lead() + g.window() + 8 : g.upper();
    TruncatedSeries acc = TruncatedSeries(g.center(), len, {}, false);
    TruncatedSeries gp = TruncatedSeries::monomial(g.center(), 0, 1.0).truncated_to(len);
    const int jmax = f.is_zero() ? -1 : std::min(f.upper() - 1, len - 1);
    for (int j = 0; j <= jmax; ++j) {
        acc = add(acc, scale(gp, f.coeff_of_w(j)));
        if (j < jmax) gp = mul(gp, g).truncated_to(len);
    }
    return acc;
}

namespace {

// Core of reversion: given  value = c x^{-1} (1 + f(x))  with f vanishing,
// return the coefficients e_j of  x = c v E(v), E = 1 + e_1 v + ...,
// where v = 1/value.  Fixed-point iteration gains one order per pass.
cvector revert_core(cplx c, const cvector& f, int len) {
    // f[j] is the coefficient of x^{j+1}.
    cvector e(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    e[0] = 1.0;
    for (int pass = 1; pass < len; ++pass) {
        // E_next = 1 + f(c v E)
        cvector next(static_cast<std::size_t>(len), cplx(0.0, 0.0));
        next[0] = 1.0;
        // powers of (c v E): start with m = 1
        cvector xpow(e);  // coefficients of (v E)^1 / v^1 ... track (cvE)^m as series in v over v^m
        cplx cm = c;
        for (int m = 1; m < len; ++m) {
            if (m > 1) {
                // xpow <- xpow * E (series product, truncated)
                cvector nx(static_cast<std::size_t>(len), cplx(0.0, 0.0));
                for (int i = 0; i < len; ++i)
                    for (int j = 0; i + j < len; ++j) nx[static_cast<std::size_t>(i + j)] += xpow[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(j)];
                xpow = std::move(nx);
                cm *= c;
            }
            if (m - 1 < static_cast<int>(f.size())) {
                const cplx fm = f[static_cast<std::size_t>(m - 1)];
                if (fm != cplx(0.0, 0.0)) {
                    // f_m (c v E)^m contributes from v^m upward
                    for (int j = 0; m + j < len; ++j)
                        next[static_cast<std::size_t>(m + j)] += fm * cm * xpow[static_cast<std::size_t>(j)];
                }
            }
        }
        e = std::move(next);
    }
    return e;
}

}  // namespace

TruncatedSeries revert(const TruncatedSeries& a) {
    if (a.is_zero())
        throw NumericalError("cannot revert the zero series");
    const bool pole_shape = (a.center() == Center::AtZero && a.lead() == -1);
    const bool zero_shape = (a.center() == Center::AtInfinity && a.lead() == 1);
    if (!pole_shape && !zero_shape)
        throw NumericalError("revert requires simple leading behavior (lead -1 at zero or +1 at infinity)");
    const int len = a.exact() ? std::max(a.window() + 4, 8) : a.window();

    if (pole_shape) {
        // value = c p^{-1}(1+f):  p = c v E(v), v = 1/value.
        const cplx c0 = a.coeffs()[0];
        cvector f(static_cast<std::size_t>(len), cplx(0.0, 0.0));
        for (int j = 1; j < len; ++j) f[static_cast<std::size_t>(j - 1)] = a.coeff_of_w(-1 + j) / c0;
        cvector e = revert_core(c0, f, len);
        cvector out(static_cast<std::size_t>(len));
        for (int j = 0; j < len; ++j) out[static_cast<std::size_t>(j)] = c0 * e[static_cast<std::size_t>(j)];
        return TruncatedSeries(Center::AtInfinity, 1, std::move(out), false);
    }
    // value = b v (1+g):  1/value = b^{-1} v^{-1} (1+g)^{-1}, then as above,
    // and the final answer is the reciprocal of the inner solution.
    TruncatedSeries recip = invert(a, len);
    const cplx c0 = recip.coeffs()[0];
    cvector f(static_cast<std::size_t>(len), cplx(0.0, 0.0));
    for (int j = 1; j < len; ++j) f[static_cast<std::size_t>(j - 1)] = recip.coeff_of_w(-1 + j) / c0;
    cvector e = revert_core(c0, f, len);
    cvector vbar(static_cast<std::size_t>(len));
    for (int j = 0; j < len; ++j) vbar[static_cast<std::size_t>(j)] = c0 * e[static_cast<std::size_t>(j)];
    TruncatedSeries vseries(Center::AtZero, 1, std::move(vbar), false);
    return invert(vseries, len);
}

TruncatedSeries recenter_exact(const TruncatedSeries& a, Center center) {
    if (!a.exact()) throw NumericalError("recenter_exact requires an exact series");
    if (a.center() == center) return a;
    TruncatedSeries r = TruncatedSeries::zero(center);
    for (int j = 0; j < a.window(); ++j)
        r = add(r, TruncatedSeries::monomial(center, a.p_exponent(j), a.coeffs()[static_cast<std::size_t>(j)]));
    return r;
}

}  // namespace dtoda
