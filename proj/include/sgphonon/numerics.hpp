#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace sgp::num {

/// coth(x) for x >= 0. Series below 1e-4, saturates to 1 above 20,
/// +inf at 0.
double coth(double x);

/// sin and cos of a*b + extra with a*b taken exactly. The rounding error of the product is
/// recovered with fma and folded back in, so huge phases stay accurate to the
/// last bit of the inputs.
struct SinCos {
    double sin;
    double cos;
};
SinCos sincos_product(double a, double b, double extra = 0.0);

/// Gauss-Legendre nodes/weights on [-1, 1].
class GaussLegendre {
public:
    explicit GaussLegendre(int order);

    static const GaussLegendre& order16();

    int order() const { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Kahan summation. Oscillatory quadratures add millions of panels whose sum
/// is far smaller than their magnitudes. `T` needs `+`, `-` and `T{}`.
template <class T>
class CompensatedSum {
public:
    void add(const T& term)
    {
        const T y = term - carry_;
        const T t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    const T& value() const { return sum_; }

private:
    T sum_{};
    T carry_{};
};

/// Composite rule over [a, b] split into `panels` equal panels. `T` needs
/// `T + T`, `T - T` and `double * T`.
template <class T, class F>
T integrate_panels(F&& f, double a, double b, std::size_t panels, const GaussLegendre& rule)
{
    CompensatedSum<T> sum;
    const double width = (b - a) / static_cast<double>(panels);
    const auto& x = rule.nodes();
    const auto& w = rule.weights();
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + width * static_cast<double>(p);
        const double mid = lo + 0.5 * width;
        T panel{};
        for (std::size_t k = 0; k < x.size(); ++k) {
            panel = panel + w[k] * f(mid + 0.5 * width * x[k]);
        }
        sum.add((0.5 * width) * panel);
    }
    return sum.value();
}

/// Relative difference |a - b| / max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1e-300)
{
    const double scale = std::fmax(std::fmax(std::fabs(a), std::fabs(b)), floor);
    return std::fabs(a - b) / scale;
}

/// Log-spaced points from `from` to `to` inclusive.
std::vector<double> logspace(double from, double to, std::size_t count);

/// Points at `per_decade` density from `from` to `to`, both ends included.
std::vector<double> logspace_per_decade(double from, double to, std::size_t per_decade);

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Results must be
/// written to per-index slots by the caller. If any index throws, the
/// exception from the lowest failing index is rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body)
{
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex mutex;
    std::size_t next = 0;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mutex);
                if (next >= n || failed_index < next) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mutex);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// Round-trippable decimal form ("%.17g"), locale independent.
std::string format_double(double value);

}  // namespace sgp::num
