#include "acfs/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace acfs {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSqrt2 = 1.4142135623730950488;

// Acklam's rational approximation, ~1.15e-9 relative error; polished below.
double norm_quantile_seed(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta (modified Lentz).
double inc_beta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

} // namespace

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p must lie in (0,1)");
    double z = norm_quantile_seed(p);
    // two Halley steps against erfc-based CDF
    for (int it = 0; it < 2; ++it) {
        const double e = norm_cdf(z) - p;
        const double u = e / norm_pdf(z);
        z -= u / (1.0 + 0.5 * z * u);
    }
    return z;
}

double reg_inc_beta(double x, double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("reg_inc_beta: a,b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lfront = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(lfront) * inc_beta_cf(x, a, b) / a;
    return 1.0 - std::exp(lfront) * inc_beta_cf(1.0 - x, b, a) / b;
}

double inv_reg_inc_beta(double u, double a, double b) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    double x;
    if (a >= 1.0 && b >= 1.0) {
        // normal-approximation seed (Abramowitz & Stegun 26.5.22)
        const double pp = u < 0.5 ? u : 1.0 - u;
        const double t = std::sqrt(-2.0 * std::log(pp));
        double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (u < 0.5) z = -z;
        const double al = (z * z - 3.0) / 6.0;
        const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        const double w = z * std::sqrt(al + h) / h -
                         (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) *
                             (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        x = a / (a + b * std::exp(2.0 * w));
    } else {
        const double lna = std::log(a / (a + b));
        const double lnb = std::log(b / (a + b));
        const double t = std::exp(a * lna) / a;
        const double s = std::exp(b * lnb) / b;
        const double w = t + s;
        if (u < t / w) x = std::pow(a * w * u, 1.0 / a);
        else x = 1.0 - std::pow(b * w * (1.0 - u), 1.0 / b);
    }
    x = std::min(std::max(x, 1e-300), 1.0 - 1e-16);
    const double lnB = log_beta(a, b);
    for (int it = 0; it < 100; ++it) {
        const double f = reg_inc_beta(x, a, b) - u;
        if (f > 0.0) hi = x;
        else lo = x;
        if (std::fabs(f) < 1e-15) break;
        const double logpdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lnB;
        double step = f * std::exp(-logpdf);
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi); // bisect when Newton escapes
        if (std::fabs(xn - x) < 1e-16 * (1.0 + std::fabs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

double student_t_pdf(double t, double nu) {
    const double lc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(nu * M_PI);
    return std::exp(lc - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_t_cdf(double t, double nu) {
    if (nu <= 0.0) throw std::domain_error("student_t_cdf: nu must be positive");
    if (t == 0.0) return 0.5;
    const double x = nu / (nu + t * t);
    const double tail = 0.5 * reg_inc_beta(x, 0.5 * nu, 0.5);
    return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double nu) {
    if (nu <= 0.0) throw std::domain_error("student_t_quantile: nu must be positive");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_t_quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    const double q = p < 0.5 ? p : 1.0 - p;
    const double x = inv_reg_inc_beta(2.0 * q, 0.5 * nu, 0.5);
    double t = std::sqrt(std::max(nu * (1.0 - x) / std::max(x, 1e-300), 0.0));
    if (p < 0.5) t = -t;
    for (int it = 0; it < 3; ++it) {
        const double e = student_t_cdf(t, nu) - p;
        const double dens = student_t_pdf(t, nu);
        if (dens <= 0.0) break;
        const double step = e / dens;
        t -= step;
        if (std::fabs(step) < 1e-12 * (1.0 + std::fabs(t))) break;
    }
    return t;
}

} // namespace acfs
