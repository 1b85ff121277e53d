#include "sgphonon/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"

namespace sgp::num {

double coth(double x)
{
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    if (x < 1e-4) return 1.0 / x + x / 3.0 - x * x * x / 45.0;
    if (x > 20.0) return 1.0;
    return 1.0 / std::tanh(x);
}

SinCos sincos_product(double a, double b, double extra)
{
    const double p = a * b;
    // |e| reaches ulp(p) / 2, which is O(1) rad once p ~ 1e16: no Taylor shortcut.
    const double e = std::fma(a, b, -p) + extra;
    const double s = std::sin(p);
    const double c = std::cos(p);
    const double se = std::sin(e);
    const double ce = std::cos(e);
    return {s * ce + c * se, c * ce - s * se};
}

GaussLegendre::GaussLegendre(int order)
{
    if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    const auto n = static_cast<std::size_t>(order);
    nodes_.resize(n);
    weights_.resize(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const double jd = static_cast<double>(j);
                p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
            }
            dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        nodes_[i] = -z;
        nodes_[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights_[i] = w;
        weights_[n - 1 - i] = w;
    }
}

const GaussLegendre& GaussLegendre::order16()
{
    static const GaussLegendre rule(16);
    return rule;
}

std::vector<double> logspace(double from, double to, std::size_t count)
{
    if (count == 0) return {};
    if (!(from > 0.0) || !(to > 0.0)) throw DomainError("logspace needs positive bounds");
    if (count == 1) return {from};
    std::vector<double> out(count);
    const double lo = std::log10(from);
    const double hi = std::log10(to);
    for (std::size_t i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = std::pow(10.0, lo + (hi - lo) * f);
    }
    out.front() = from;
    out.back() = to;
    return out;
}

std::vector<double> logspace_per_decade(double from, double to, std::size_t per_decade)
{
    if (!(from > 0.0) || !(to > 0.0)) throw DomainError("logspace needs positive bounds");
    if (per_decade == 0) throw DomainError("points per decade must be positive");
    const double decades = std::fabs(std::log10(to) - std::log10(from));
    const auto count = static_cast<std::size_t>(std::llround(decades * static_cast<double>(per_decade))) + 1;
    return logspace(from, to, count);
}

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace sgp::num
