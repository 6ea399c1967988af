#include "diqkd/numeric.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace diqkd {

namespace {

constexpr int kFactorialTable = 512;

const std::array<double, kFactorialTable>& factorial_table() {
    static const std::array<double, kFactorialTable> table = [] {
        std::array<double, kFactorialTable> t{};
        t[0] = 0.0;
        for (int i = 1; i < kFactorialTable; ++i) t[i] = t[i - 1] + std::log(double(i));
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(int n) {
    if (n < 0) throw std::domain_error("log_factorial: negative argument");
    if (n < kFactorialTable) return factorial_table()[n];
    return std::lgamma(double(n) + 1.0);
}

double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::round(std::exp(log_binomial(n, k)));
}

void LogTerm::mul_pow(double base, int exponent) {
    if (exponent == 0 || zero_) return;
    if (base == 0.0) {
        if (exponent < 0) {
            throw std::logic_error("LogTerm: negative power of a vanishing factor");
        }
        zero_ = true;
        return;
    }
    if (base < 0.0) {
        if (exponent & 1) negative_ = !negative_;
        base = -base;
    }
    log_mag_ += exponent * std::log(base);
}

void LogTerm::mul_pow(const PowerBase& base, int exponent) {
    if (exponent == 0 || zero_) return;
    if (base.zero) {
        if (exponent < 0) {
            throw std::logic_error("LogTerm: negative power of a vanishing factor");
        }
        zero_ = true;
        return;
    }
    if (base.negative && (exponent & 1)) negative_ = !negative_;
    log_mag_ += exponent * base.log_abs;
}

ScalarOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double tol, int max_iter) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    ScalarOptimum best{c, fc};
    if (fd > best.value) best = {d, fd};
    // The bracket ends are cheap to check and catch monotone objectives.
    for (double x : {lo, hi}) {
        double fx = f(x);
        if (fx > best.value) best = {x, fx};
    }
    return best;
}

ScalarOptimum golden_section_max_multi(const std::function<double(double)>& f, double lo,
                                       double hi, double tol, int seeds) {
    ScalarOptimum best;
    seeds = std::max(seeds, 1);
    double width = (hi - lo) / seeds;
    for (int s = 0; s < seeds; ++s) {
        double a = lo + s * width;
        double b = (s + 1 == seeds) ? hi : a + width;
        ScalarOptimum local = golden_section_max(f, a, b, tol);
        if (local.value > best.value) best = local;
    }
    return best;
}

double quantize(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    int e = 0;
    double m = std::frexp(x, &e);
    return std::ldexp(std::round(std::ldexp(m, 40)), e - 40);
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace diqkd
