#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace slt {

namespace detail {

// Gauss-Kronrod 7-15 nodes and weights on [-1,1] (positive half).
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <typename F>
void gk15(const F& f, double a, double b, double& kronrod, double& gauss) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0;
    double resg = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * kKronrodNodes[i];
        double fsum;
        if (i == 7) {
            fsum = f(c);
        } else {
            fsum = f(c - x) + f(c + x);
        }
        resk += kKronrodWeights[i] * fsum;
        // odd Kronrod indices (and the centre) are the embedded Gauss-7 nodes
        if (i % 2 == 1) resg += kGaussWeights[i / 2] * fsum;
    }
    kronrod = resk * h;
    gauss = resg * h;
}

template <typename F>
double integrate_rec(const F& f, double a, double b, double abs_tol, int depth, int max_depth,
                     double& leaked) {
    double k, g;
    gk15(f, a, b, k, g);
    const double err = std::fabs(k - g);
    // the error estimate cannot beat round-off on the panel value
    const double floor_tol = 4e-16 * std::fabs(k) + 1e-307;
    if (err <= std::max(abs_tol, floor_tol)) return k;
    if (depth >= max_depth) {
        leaked += err;
        return k;
    }
    const double m = 0.5 * (a + b);
    return integrate_rec(f, a, m, 0.5 * abs_tol, depth + 1, max_depth, leaked) +
           integrate_rec(f, m, b, 0.5 * abs_tol, depth + 1, max_depth, leaked);
}

} // namespace detail

// Adaptive Gauss-Kronrod integration of f over the finite interval [a,b].
// Fails only when the error leaked by depth-capped panels is material
// against the requested tolerance.
template <typename F>
double integrate_gk(const F& f, double a, double b, double abs_tol = 1e-12, int max_depth = 61) {
    if (!(b >= a)) throw std::invalid_argument("integrate_gk: requires b >= a");
    if (a == b) return 0.0;
    double leaked = 0.0;
    const double v = detail::integrate_rec(f, a, b, abs_tol, 0, max_depth, leaked);
    if (leaked > std::max(abs_tol, 4e-15 * std::fabs(v))) {
        throw std::runtime_error("integrate_gk: failed to converge on [" + std::to_string(a) + "," +
                                 std::to_string(b) + "], leaked error " + std::to_string(leaked));
    }
    return v;
}

} // namespace slt
