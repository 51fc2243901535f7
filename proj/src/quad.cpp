#include "tclevy/quad.hpp"

#include <cmath>

namespace tclevy {

namespace {

struct Quad {
    const std::function<double(double)>& f;
    double rel_tol;
    double abs_tol;
    int max_depth = 48;

    double simpson(double a, double fa, double fm, double b, double fb) const {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    double recurse(double a, double fa, double b, double fb, double m, double fm,
                   double whole, int depth, double scale) const {
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = f(lm), frm = f(rm);
        double left = simpson(a, fa, flm, m, fm);
        double right = simpson(m, fm, frm, b, fb);
        double delta = left + right - whole;
        if (depth >= max_depth ||
            std::fabs(delta) <= 15.0 * (abs_tol + rel_tol * std::fabs(scale))) {
            return left + right + delta / 15.0;
        }
        return recurse(a, fa, m, fm, lm, flm, left, depth + 1, scale) +
               recurse(m, fm, b, fb, rm, frm, right, depth + 1, scale);
    }
};

} // namespace

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, double abs_tol) {
    if (!(b > a)) return 0.0;
    // Split into a few panels first so narrow features away from the panel
    // midpoint are not missed by the initial Simpson estimate.
    const int panels = 8;
    double h = (b - a) / panels;
    double total = 0.0;
    Quad q{f, rel_tol, abs_tol};
    // First pass to get the magnitude scale for the relative test.
    double scale = 0.0;
    for (int i = 0; i <= panels; ++i) scale = std::max(scale, std::fabs(f(a + i * h)));
    scale *= (b - a);
    if (scale == 0.0) scale = abs_tol;
    for (int i = 0; i < panels; ++i) {
        double x0 = a + i * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
        double f0 = f(x0), f1 = f(x1), fm = f(xm);
        double whole = q.simpson(x0, f0, fm, x1, f1);
        total += q.recurse(x0, f0, x1, f1, xm, fm, whole, 0, scale / panels);
    }
    return total;
}

} // namespace tclevy
