#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <vector>

namespace ndsim {

namespace detail {

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature on [a, b].
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 50) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Integrate splitting at interior breakpoints (integrand kinks).
template <typename F>
double integrate_split(const F& f, double a, double b, std::vector<double> breaks,
                       double tol = 1e-12) {
    double total = 0.0;
    double lo = a;
    std::sort(breaks.begin(), breaks.end());
    for (double c : breaks) {
        if (c > a && c < b) {
            total += integrate(f, lo, c, tol);
            lo = c;
        }
    }
    total += integrate(f, lo, b, tol);
    return total;
}

}  // namespace ndsim
