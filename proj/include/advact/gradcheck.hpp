#pragma once

#include <functional>

#include "advact/error.hpp"
#include "advact/matrix.hpp"

namespace advact {

// Central finite differences of a scalar-valued function of a matrix:
// g[i,j] = (f(x + h e_ij) - f(x - h e_ij)) / (2h).
//
// This is the reference oracle for every derivative claim in the library;
// it deliberately knows nothing about the tape or any closed form.
inline Matrix finite_difference_grad(const std::function<double(const Matrix&)>& f,
                                     const Matrix& x, double h = 1e-5) {
    if (!(h > 0.0)) throw DomainError("finite_difference_grad: h must be > 0");
    Matrix g(x.rows(), x.cols());
    Matrix probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + h;
        const double fp = f(probe);
        probe.data()[i] = orig - h;
        const double fm = f(probe);
        probe.data()[i] = orig;
        g.data()[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// Scalar convenience overload.
inline double finite_difference(const std::function<double(double)>& f, double x,
                                double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative error with an absolute floor, as used by all gradient checks:
// |a - b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) / scale;
}

} // namespace advact
