#include "rlab/quadrature.hpp"

#include "rlab/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace rlab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Newton iteration on P_n with the three-term recurrence; nodes symmetric.
std::unique_ptr<GlRule> build_rule(int n) {
    auto rule = std::make_unique<GlRule>();
    rule->n = n;
    rule->nodes.resize(static_cast<std::size_t>(n));
    rule->weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / static_cast<double>(j);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule->nodes[static_cast<std::size_t>(i)] = -x;
        rule->weights[static_cast<std::size_t>(i)] = w;
        rule->nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule->weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

} // namespace

const GlRule& gl_rule(int n) {
    if (n < 1) throw ValidationError("Gauss-Legendre node count must be >= 1, got " + std::to_string(n));
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GlRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return *it->second;
}

std::complex<double> integrate(const std::function<std::complex<double>(double)>& f,
                               double a, double b, double rel_tol) {
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    auto level = [&](int n) {
        const GlRule& r = gl_rule(n);
        std::complex<double> acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += r.weights[static_cast<std::size_t>(i)] * f(mid + hw * r.nodes[static_cast<std::size_t>(i)]);
        return hw * acc;
    };
    std::complex<double> prev = level(kQuadMinNodes);
    for (int n = 2 * kQuadMinNodes; n <= kQuadMaxNodes; n *= 2) {
        const std::complex<double> cur = level(n);
        const double scale = std::max(std::abs(cur), 1e-300);
        if (std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    throw NumericError("quadrature failed to converge to rel_tol=" + std::to_string(rel_tol) +
                       " within " + std::to_string(kQuadMaxNodes) + " nodes");
}

std::complex<double> sc_integral(const std::function<std::complex<double>(double)>& f,
                                 double rel_tol) {
    return integrate(
        [&f](double theta) {
            const double s = std::sin(theta);
            return (2.0 / kPi) * s * s * f(2.0 * std::cos(theta));
        },
        0.0, kPi, rel_tol);
}

} // namespace rlab
