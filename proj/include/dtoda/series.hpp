#ifndef DTODA_SERIES_HPP
#define DTODA_SERIES_HPP

#include <utility>

#include "dtoda/common.hpp"

namespace dtoda {

// Expansion point of a truncated Laurent series.  The local variable is
// w = 1/p at infinity and w = p at zero, so a series is in both cases an
// ascending power series in w times w^lead.
enum class Center { AtInfinity, AtZero };

// Truncated Laurent expansion with complex coefficients.
//
// coeffs[j] multiplies w^(lead+j).  A series is either *windowed* — known
// modulo O(w^upper) with upper = lead + coeffs.size() — or *exact*, in
// which case every coefficient outside the stored range is zero (Laurent
// polynomials such as the flow generators are carried this way).
// coeffs[0] != 0 except for the canonical zero series (lead = 0, empty).
class TruncatedSeries {
public:
    TruncatedSeries() = default;
    TruncatedSeries(Center center, int lead, cvector coeffs, bool exact = false);

    static TruncatedSeries zero(Center center);
    // coeff * p^k, exact.
    static TruncatedSeries monomial(Center center, int p_exponent, cplx coeff);
    // Exact series from (p-exponent, coefficient) pairs.
    static TruncatedSeries from_p_terms(Center center,
                                        const std::vector<std::pair<int, cplx>>& terms);
    // Expansion of 1/(p - b) at the given center, with `length` coefficients.
    // At zero this requires b != 0.
    static TruncatedSeries pole_expansion(Center center, cplx b, int length);

    Center center() const { return center_; }
    int lead() const { return lead_; }
    const cvector& coeffs() const { return c_; }
    bool exact() const { return exact_; }
    bool is_zero() const { return c_.empty(); }
    int window() const { return static_cast<int>(c_.size()); }
    // Series is known modulo O(w^upper); meaningless for exact series.
    int upper() const { return lead_ + window(); }

    // p-exponent carried by coeffs[j].
    int p_exponent(int j) const;
    cplx coeff_of_w(int e) const;
    cplx coeff_of_p(int k) const;

    // Drop stored coefficients at or above w^new_upper and mark windowed.
    TruncatedSeries truncated_to(int new_upper) const;

    // Exact-series-only operations.
    cplx eval_at(cplx p) const;
    TruncatedSeries derivative_p() const;

private:
    Center center_ = Center::AtInfinity;
    int lead_ = 0;
    cvector c_;
    bool exact_ = true;  // canonical zero is exact

    void normalize();
};

TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries sub(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b);
TruncatedSeries scale(const TruncatedSeries& a, cplx factor);
// Multiplicative inverse.  `length` fixes the output window when `a` is
// exact; otherwise the input window is kept.
TruncatedSeries invert(const TruncatedSeries& a, int length = -1);

inline TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) { return add(a, b); }
inline TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) { return sub(a, b); }
inline TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) { return mul(a, b); }
inline TruncatedSeries operator*(cplx f, const TruncatedSeries& a) { return scale(a, f); }

// exp of a series vanishing at the center.
TruncatedSeries s_exp(const TruncatedSeries& a, int length = -1);
// log of 1 + (vanishing part); the constant term must be 1.
TruncatedSeries s_log(const TruncatedSeries& a, int length = -1);
// (1 + vanishing)^r via exp(r log).
TruncatedSeries s_pow(const TruncatedSeries& a, double r, int length = -1);

// Integer power by repeated multiplication (n >= 0, or n < 0 through invert).
TruncatedSeries s_powi(const TruncatedSeries& a, int n, int length = -1);

// Split into the p^{>=0} part and the p^{<0} part; the sum reconstructs
// the input on its window.
std::pair<TruncatedSeries, TruncatedSeries> split_parts(const TruncatedSeries& a);

// Composition f(g) where f has lead >= 0 in its own variable and g vanishes
// at its center; the result lives in g's frame.
TruncatedSeries compose(const TruncatedSeries& f, const TruncatedSeries& g);

// Compositional inverse.  Input: AtZero with lead -1 (simple pole shape,
// like zbar(p)); output: the inverse function expanded at the image point,
// AtInfinity with lead +1.  The opposite orientation is also accepted and
// produces the AtZero shape, so revert(revert(a)) is well typed.
TruncatedSeries revert(const TruncatedSeries& a);

// An exact Laurent polynomial viewed from the other expansion point.
TruncatedSeries recenter_exact(const TruncatedSeries& a, Center center);

}  // namespace dtoda

#endif
