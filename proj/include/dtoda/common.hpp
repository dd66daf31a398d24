#ifndef DTODA_COMMON_HPP
#define DTODA_COMMON_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtoda {

using cplx = std::complex<double>;
using cvector = std::vector<cplx>;

// Invalid model parameters or malformed input files.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Breakdown of a numerical procedure (divergence, singular Jacobian,
// frame collision, insufficient truncation window).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double abs2(cplx z) { return std::norm(z); }

// Principal log of a quotient of nearby values.  Differences of logs of
// perturbed quantities are taken this way so that branch cuts of the
// individual logs never enter.
inline cplx ratio_log(cplx num, cplx den) { return std::log(num / den); }

// Largest modulus in a list; 0 for an empty list.
inline double max_abs(const cvector& v) {
    double m = 0.0;
    for (const cplx& z : v) m = std::max(m, std::abs(z));
    return m;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace dtoda

#endif
