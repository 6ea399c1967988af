#pragma once

// Small numerical helpers shared by the closed-form distributions, the key
// rate formulas and the optimizer.

#include <cmath>
#include <functional>
#include <limits>

namespace diqkd {

/// Natural log of n!, served from a lazily built table for n < 512.
double log_factorial(int n);

/// Natural log of the binomial coefficient C(n, k); -inf when k is outside [0, n].
double log_binomial(int n, int k);

/// Exact-ish binomial coefficient as a double (used for small arguments).
double binomial(int n, int k);

/// Neumaier-compensated accumulator.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Pre-digested base for repeated integer powers.
struct PowerBase {
    double log_abs = 0.0;
    bool zero = false;
    bool negative = false;

    explicit PowerBase(double x = 1.0)
        : log_abs(x == 0.0 ? 0.0 : std::log(std::fabs(x))), zero(x == 0.0), negative(x < 0.0) {}
};

/// A product of binomials, integer powers and signs kept in log-magnitude
/// form. A power with a zero base and a positive exponent marks the whole
/// product as exactly zero; a zero base with exponent 0 contributes 1.
class LogTerm {
  public:
    void mul_binomial(int n, int k) {
        if (k < 0 || k > n) {
            zero_ = true;
            return;
        }
        log_mag_ += log_binomial(n, k);
    }
    void div_factorial(int n) {
        if (n < 0) {
            zero_ = true;
            return;
        }
        log_mag_ -= log_factorial(n);
    }
    void mul_factorial(int n) {
        if (n < 0) {
            zero_ = true;
            return;
        }
        log_mag_ += log_factorial(n);
    }
    /// Multiplies by base^exponent. Negative bases flip the sign for odd
    /// exponents. A negative exponent on a zero base is a structural error.
    void mul_pow(double base, int exponent);
    void mul_pow(const PowerBase& base, int exponent);
    void mul_sign(int parity) {
        if (parity & 1) negative_ = !negative_;
    }
    void mul_log(double log_factor) { log_mag_ += log_factor; }

    bool is_zero() const { return zero_; }
    double value() const {
        if (zero_) return 0.0;
        double m = std::exp(log_mag_);
        return negative_ ? -m : m;
    }

  private:
    double log_mag_ = 0.0;
    bool negative_ = false;
    bool zero_ = false;
};

struct ScalarOptimum {
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
};

/// Golden-section maximization of a unimodal function on [lo, hi].
ScalarOptimum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                 double tol, int max_iter = 200);

/// Golden-section maximization restarted on `seeds` equal sub-intervals;
/// returns the best of the local optima.
ScalarOptimum golden_section_max_multi(const std::function<double(double)>& f, double lo,
                                       double hi, double tol, int seeds);

/// Rounds x to about 12 significant digits so that parameters that differ
/// only by roundoff share cache entries.
double quantize(double x);

/// Binary entropy in bits with h(0) = h(1) = 0.
double binary_entropy(double x);

}  // namespace diqkd
