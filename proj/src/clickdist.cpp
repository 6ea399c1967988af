#include "diqkd/clickdist.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "diqkd/numeric.hpp"

namespace diqkd {

namespace {

using LossKey = std::array<int, 12>;

/// Amplitude accumulator grouped by loss-mode occupation. Distinct index
/// tuples can land on the same loss occupation and must interfere there.
class LossAccumulator {
  public:
    void add(const LossKey& key, double value) {
        for (auto& [k, sum] : slots_) {
            if (k == key) {
                sum.add(value);
                return;
            }
        }
        slots_.emplace_back(key, KahanSum{});
        slots_.back().second.add(value);
    }

    /// sum_L |c_L|^2 prod_L L! scaled by exp(log_scale).
    double norm(double log_scale, int key_size) const {
        KahanSum total;
        for (const auto& [key, sum] : slots_) {
            double c = sum.value();
            if (c == 0.0) continue;
            double lf = log_scale;
            for (int i = 0; i < key_size; ++i) lf += log_factorial(key[i]);
            total.add(c * c * std::exp(lf));
        }
        return total.value();
    }

  private:
    std::vector<std::pair<LossKey, KahanSum>> slots_;
};

struct Trig {
    PowerBase c;
    PowerBase s;
    explicit Trig(double theta) : c(std::cos(theta)), s(std::sin(theta)) {}
};

struct Channel {
    PowerBase t;
    PowerBase r;
    explicit Channel(double zeta) {
        if (!(zeta >= 0.0 && zeta <= 1.0)) {
            throw std::invalid_argument("efficiency outside [0, 1]: " + std::to_string(zeta));
        }
        t = PowerBase(std::sqrt(zeta));
        r = PowerBase(std::sqrt(1.0 - zeta));
    }
};

// Coefficient of h'^alpha v'^(p+q-alpha) in the image of h^p v^q under
// h -> c h' + s v', v -> c v' - s h'.
double rot_amp(int p, int q, int alpha, const Trig& tr) {
    if (alpha < 0 || alpha > p + q) return 0.0;
    KahanSum acc;
    const int lo = std::max(0, alpha - p), hi = std::min(q, alpha);
    for (int h = lo; h <= hi; ++h) {
        LogTerm term;
        term.mul_binomial(p, alpha - h);
        term.mul_binomial(q, h);
        term.mul_sign(h);
        term.mul_pow(tr.c, (alpha - h) + (q - h));
        term.mul_pow(tr.s, (p - alpha + h) + h);
        acc.add(term.value());
    }
    return acc.value();
}

// Coefficient of b'^tau c'^(k+r-tau) in the image of b^k c^r under
// b -> (b' + c')/sqrt2, c -> (c' - b')/sqrt2.
double bs_amp(int k, int r, int tau) {
    if (tau < 0 || tau > k + r) return 0.0;
    KahanSum acc;
    const int lo = std::max(0, tau - k), hi = std::min(r, tau);
    for (int u = lo; u <= hi; ++u) {
        LogTerm term;
        term.mul_binomial(k, tau - u);
        term.mul_binomial(r, u);
        term.mul_sign(u);
        acc.add(term.value());
    }
    return acc.value() * std::pow(std::numbers::sqrt2, -(k + r));
}

// Log of 1/(n! sqrt(n+1)), the normalization of an n-pair singlet source.
double log_pair_norm(int n) { return -log_factorial(n) - 0.5 * std::log(double(n + 1)); }

double log_pattern_factorials(const ClickPattern& p) {
    double s = 0.0;
    for (int i = 0; i < p.size; ++i) s += log_factorial(p[i]);
    return s;
}

// Central pair a_h^(n-i) a_v^i b_h^i b_v^(n-i) with Alice's arm a through
// channel ca (kept counts l, j) and Bob's arm b through channel cb (kept
// counts k, m).
void central_factor(LogTerm& t, int n, int i, int l, int j, int k, int m, const Channel& ca,
                    const Channel& cb) {
    t.mul_binomial(n, i);
    t.mul_sign(i);
    t.mul_binomial(n - i, l);
    t.mul_binomial(i, j);
    t.mul_binomial(i, k);
    t.mul_binomial(n - i, m);
    t.mul_pow(ca.t, l + j);
    t.mul_pow(ca.r, n - l - j);
    t.mul_pow(cb.t, k + m);
    t.mul_pow(cb.r, n - k - m);
}

// Relay pair c_h^(n-x) c_v^x d_h^x d_v^(n-x) through identical channels
// with kept counts c_h: r, c_v: y, d_h: z, d_v: w.
void relay_factor(LogTerm& t, int n, int x, int r, int y, int z, int w, const Channel& ch) {
    t.mul_binomial(n, x);
    t.mul_sign(x);
    t.mul_binomial(x, y);
    t.mul_binomial(x, z);
    t.mul_binomial(n - x, r);
    t.mul_binomial(n - x, w);
    t.mul_pow(ch.t, y + z + r + w);
    t.mul_pow(ch.r, 2 * n - (y + z + r + w));
}

double esr_probability(int n, int np, const ClickPattern& P, const CircuitParams& params,
                       double theta_a, double theta_b) {
    const int alpha = P[0], beta = P[1], gamma = P[2], delta = P[3];
    const int mu = P[4], nu = P[5], tau = P[6], lambda = P[7];
    const Channel cd(params.zeta_cd), ch(params.zeta_cchd);
    const Trig ta(theta_a), tb(theta_b);
    const int sa = alpha + beta, sb = gamma + delta;
    LossAccumulator acc;
    for (int i = 0; i <= n; ++i) {
        for (int j = std::max(0, sa - (n - i)); j <= std::min(i, sa); ++j) {
            const int l = sa - j;
            const double rot_a = rot_amp(l, j, alpha, ta);
            if (rot_a == 0.0) continue;
            for (int k = 0; k <= std::min(i, mu + tau); ++k) {
                const int r = mu + tau - k;
                if (r > np) continue;
                const double bs_h = bs_amp(k, r, tau);
                if (bs_h == 0.0) continue;
                for (int m = 0; m <= std::min(n - i, nu + lambda); ++m) {
                    const int y = nu + lambda - m;
                    if (y > np) continue;
                    const double bs_v = bs_amp(m, y, lambda);
                    if (bs_v == 0.0) continue;
                    for (int x = y; x <= np - r; ++x) {
                        for (int w = std::max(0, sb - x); w <= std::min(np - x, sb); ++w) {
                            const int z = sb - w;
                            const double rot_b = rot_amp(z, w, gamma, tb);
                            if (rot_b == 0.0) continue;
                            LogTerm t;
                            central_factor(t, n, i, l, j, k, m, cd, ch);
                            relay_factor(t, np, x, r, y, z, w, cd);
                            if (t.is_zero()) continue;
                            const double v = t.value() * rot_a * bs_h * bs_v * rot_b;
                            acc.add({n - i - l, i - j, i - k, n - i - m, np - x - r, x - y, x - z,
                                     np - x - w},
                                    v);
                        }
                    }
                }
            }
        }
    }
    const double scale = 2.0 * (log_pair_norm(n) + log_pair_norm(np)) + log_pattern_factorials(P);
    return acc.norm(scale, 8);
}

double pqa_probability(int n, int n1, int n2, const ClickPattern& P, const CircuitParams& params,
                       double theta_a, double theta_b) {
    const int alpha = P[0], beta = P[1], gamma = P[2], delta = P[3];
    const int mu = P[4], nu = P[5], tau = P[6], lambda = P[7];
    const Channel cd(params.zeta_cd), ch(params.zeta_cchd), split(params.t);
    const Trig ta(theta_a), tb(theta_b), had(std::numbers::pi / 4.0);
    const int sa = alpha + beta, g = gamma + delta;

    // Bob's branch: d2 counts (z, w) through the Hadamard and the rotation.
    auto bob_amp = [&](int z, int w) {
        KahanSum s;
        for (int u = 0; u <= z + w; ++u) {
            const double hd = rot_amp(z, w, u, had);
            if (hd == 0.0) continue;
            s.add(hd * rot_amp(u, g - u, gamma, tb));
        }
        return s.value();
    };

    LossAccumulator acc;
    for (int i = 0; i <= n; ++i) {
        for (int j = std::max(0, sa - (n - i)); j <= std::min(i, sa); ++j) {
            const int l = sa - j;
            const double rot_a = rot_amp(l, j, alpha, ta);
            if (rot_a == 0.0) continue;
            for (int k = 0; k <= std::min(i, mu + tau); ++k) {
                const int r = mu + tau - k;
                const double bs_h = bs_amp(k, r, tau);
                if (bs_h == 0.0) continue;
                for (int m = 0; m <= std::min(n - i, nu + lambda); ++m) {
                    const int sv = nu + lambda - m;
                    const double bs_v = bs_amp(m, sv, lambda);
                    if (bs_v == 0.0) continue;
                    for (int x = 0; x <= n1; ++x) {
                        const int y = g + r + sv - x;
                        if (y < 0 || y > n2) continue;
                        for (int z = std::max(0, g - y); z <= std::min(x, g); ++z) {
                            const int w = g - z;
                            const double had_c = rot_amp(x - z, y - w, r, had);
                            if (had_c == 0.0) continue;
                            const double amp_b = bob_amp(z, w);
                            if (amp_b == 0.0) continue;
                            LogTerm t;
                            central_factor(t, n, i, l, j, k, m, cd, ch);
                            t.mul_log(-0.5 * (log_factorial(n1) + log_factorial(n2)));
                            t.mul_binomial(n1, x);
                            t.mul_binomial(n2, y);
                            t.mul_pow(cd.t, x + y);
                            t.mul_pow(cd.r, n1 + n2 - x - y);
                            t.mul_binomial(x, z);
                            t.mul_binomial(y, w);
                            t.mul_pow(split.t, z + w);
                            t.mul_pow(split.r, x + y - z - w);
                            if (t.is_zero()) continue;
                            const double v = t.value() * rot_a * bs_h * bs_v * had_c * amp_b;
                            acc.add({n - i - l, i - j, i - k, n - i - m, n1 - x, n2 - y}, v);
                        }
                    }
                }
            }
        }
    }
    const double scale = 2.0 * log_pair_norm(n) + log_pattern_factorials(P);
    return acc.norm(scale, 6);
}

double two_esr_probability(int n1, int n2, int n3, const ClickPattern& P,
                           const CircuitParams& params, double theta_a, double theta_b) {
    const int alpha = P[0], beta = P[1], gamma = P[2], delta = P[3];
    const int muA = P[4], nuA = P[5], tauA = P[6], lambdaA = P[7];
    const int muB = P[8], nuB = P[9], tauB = P[10], lambdaB = P[11];
    const Channel cd(params.zeta_cd), ch(params.zeta_cchd);
    const Trig ta(theta_a), tb(theta_b);
    const int sa = alpha + beta, sb = gamma + delta;

    LossAccumulator acc;
    for (int i = 0; i <= n1; ++i) {
        for (int l = 0; l <= std::min(n1 - i, muA + tauA); ++l) {
            const int rA = muA + tauA - l;
            if (rA > n2) continue;
            const double bsA_h = bs_amp(l, rA, tauA);
            if (bsA_h == 0.0) continue;
            for (int j = 0; j <= std::min(i, nuA + lambdaA); ++j) {
                const int yA = nuA + lambdaA - j;
                if (yA > n2) continue;
                const double bsA_v = bs_amp(j, yA, lambdaA);
                if (bsA_v == 0.0) continue;
                for (int k = 0; k <= std::min(i, muB + tauB); ++k) {
                    const int rB = muB + tauB - k;
                    if (rB > n3) continue;
                    const double bsB_h = bs_amp(k, rB, tauB);
                    if (bsB_h == 0.0) continue;
                    for (int m = 0; m <= std::min(n1 - i, nuB + lambdaB); ++m) {
                        const int yB = nuB + lambdaB - m;
                        if (yB > n3) continue;
                        const double bsB_v = bs_amp(m, yB, lambdaB);
                        if (bsB_v == 0.0) continue;
                        const double central = bsA_h * bsA_v * bsB_h * bsB_v;
                        for (int xA = yA; xA <= n2 - rA; ++xA) {
                            for (int wA = std::max(0, sa - xA); wA <= std::min(n2 - xA, sa);
                                 ++wA) {
                                const int zA = sa - wA;
                                const double rot_a = rot_amp(zA, wA, alpha, ta);
                                if (rot_a == 0.0) continue;
                                for (int xB = yB; xB <= n3 - rB; ++xB) {
                                    for (int wB = std::max(0, sb - xB);
                                         wB <= std::min(n3 - xB, sb); ++wB) {
                                        const int zB = sb - wB;
                                        const double rot_b = rot_amp(zB, wB, gamma, tb);
                                        if (rot_b == 0.0) continue;
                                        LogTerm t;
                                        central_factor(t, n1, i, l, j, k, m, ch, ch);
                                        relay_factor(t, n2, xA, rA, yA, zA, wA, cd);
                                        relay_factor(t, n3, xB, rB, yB, zB, wB, cd);
                                        if (t.is_zero()) continue;
                                        const double v = t.value() * central * rot_a * rot_b;
                                        acc.add({n1 - i - l, i - j, i - k, n1 - i - m,
                                                 n2 - xA - rA, xA - yA, xA - zA, n2 - xA - wA,
                                                 n3 - xB - rB, xB - yB, xB - zB, n3 - xB - wB},
                                                v);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    const double scale = 2.0 * (log_pair_norm(n1) + log_pair_norm(n2) + log_pair_norm(n3)) +
                         log_pattern_factorials(P);
    return acc.norm(scale, 12);
}

double unassisted_probability(int n, const ClickPattern& P, const CircuitParams& params,
                              double theta_a, double theta_b) {
    const int alpha = P[0], gamma = P[2];
    const int sb = P[2] + P[3];
    const Channel ch(params.zeta_cchd);
    const Trig ta(theta_a), tb(theta_b);
    LossAccumulator acc;
    for (int i = 0; i <= n; ++i) {
        const double rot_a = rot_amp(n - i, i, alpha, ta);
        if (rot_a == 0.0) continue;
        for (int k = std::max(0, sb - (n - i)); k <= std::min(i, sb); ++k) {
            const int m = sb - k;
            const double rot_b = rot_amp(k, m, gamma, tb);
            if (rot_b == 0.0) continue;
            LogTerm t;
            t.mul_binomial(n, i);
            t.mul_sign(i);
            t.mul_binomial(i, k);
            t.mul_binomial(n - i, m);
            t.mul_pow(ch.t, k + m);
            t.mul_pow(ch.r, n - k - m);
            if (t.is_zero()) continue;
            acc.add({i - k, n - i - m}, t.value() * rot_a * rot_b);
        }
    }
    const double scale = 2.0 * log_pair_norm(n) + log_pattern_factorials(P);
    return acc.norm(scale, 2);
}

void check_counts(Architecture arch, const std::vector<int>& counts) {
    if (static_cast<int>(counts.size()) != conditioning_size(arch)) {
        throw std::invalid_argument("conditioning tuple for " + to_string(arch) + " needs " +
                                    std::to_string(conditioning_size(arch)) + " entries");
    }
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("negative photon number in conditioning tuple");
    }
}

/// Largest counter total each party can see.
std::pair<int, int> party_bounds(Architecture arch, const std::vector<int>& c) {
    switch (arch) {
        case Architecture::esr: return {c[0], c[1]};
        case Architecture::pqa: return {c[0], c[1] + c[2]};
        case Architecture::two_esr: return {c[1], c[2]};
        case Architecture::unassisted: return {c[0], c[0]};
    }
    return {0, 0};
}

struct Block {
    int start;
    int length;
    int bound;
};

std::vector<Block> support_blocks(Architecture arch, const std::vector<int>& c) {
    auto [na, nb] = party_bounds(arch, c);
    std::vector<Block> blocks{{0, 2, na}, {2, 2, nb}};
    switch (arch) {
        case Architecture::esr: blocks.push_back({4, 4, c[0] + c[1]}); break;
        case Architecture::pqa: blocks.push_back({4, 4, c[0] + c[1] + c[2]}); break;
        case Architecture::two_esr:
            blocks.push_back({4, 4, c[0] + c[1]});
            blocks.push_back({8, 4, c[0] + c[2]});
            break;
        case Architecture::unassisted: break;
    }
    return blocks;
}

void enumerate_block(ClickPattern& p, const Block& b, int offset, int remaining,
                     const std::function<void()>& inner) {
    if (offset == b.length) {
        inner();
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        p.set(b.start + offset, v);
        enumerate_block(p, b, offset + 1, remaining - v, inner);
    }
    p.set(b.start + offset, 0);
}

void enumerate_blocks(ClickPattern& p, const std::vector<Block>& blocks, std::size_t idx,
                      const std::function<void(const ClickPattern&)>& visit) {
    if (idx == blocks.size()) {
        visit(p);
        return;
    }
    enumerate_block(p, blocks[idx], 0, blocks[idx].bound,
                    [&] { enumerate_blocks(p, blocks, idx + 1, visit); });
}

CondDistribution make_distribution(Architecture arch, const std::vector<int>& counts,
                                   const CircuitParams& params, double theta_a, double theta_b) {
    CondDistribution d;
    d.arch = arch;
    d.conditioning = counts;
    d.params = params;
    d.theta_a = theta_a;
    d.theta_b = theta_b;
    return d;
}

}  // namespace

bool within_support(Architecture arch, const std::vector<int>& c, const ClickPattern& p) {
    if (p.size != detector_count(arch)) return false;
    const int sa = p[0] + p[1], sb = p[2] + p[3];
    auto block = [&](int start) { return p[start] + p[start + 1] + p[start + 2] + p[start + 3]; };
    switch (arch) {
        case Architecture::esr:
            return sa <= c[0] && sb <= c[1] && block(4) <= c[0] + c[1];
        case Architecture::pqa:
            return sa <= c[0] && sb <= c[1] + c[2] && sb + block(4) <= c[0] + c[1] + c[2];
        case Architecture::two_esr:
            return sa <= c[1] && sb <= c[2] && block(4) <= c[0] + c[1] &&
                   block(8) <= c[0] + c[2];
        case Architecture::unassisted:
            return sa == c[0] && sb <= c[0];
    }
    return false;
}

double pattern_probability(Architecture arch, const std::vector<int>& counts,
                           const ClickPattern& pattern, const CircuitParams& params,
                           double theta_a, double theta_b) {
    check_counts(arch, counts);
    if (!within_support(arch, counts, pattern)) return 0.0;
    switch (arch) {
        case Architecture::esr:
            return esr_probability(counts[0], counts[1], pattern, params, theta_a, theta_b);
        case Architecture::pqa:
            return pqa_probability(counts[0], counts[1], counts[2], pattern, params, theta_a,
                                   theta_b);
        case Architecture::two_esr:
            return two_esr_probability(counts[0], counts[1], counts[2], pattern, params, theta_a,
                                       theta_b);
        case Architecture::unassisted:
            return unassisted_probability(counts[0], pattern, params, theta_a, theta_b);
    }
    return 0.0;
}

CondDistribution cond_distribution(Architecture arch, const std::vector<int>& counts,
                                   const CircuitParams& params, double theta_a, double theta_b) {
    check_counts(arch, counts);
    CondDistribution d = make_distribution(arch, counts, params, theta_a, theta_b);
    ClickPattern p;
    p.size = static_cast<std::uint8_t>(detector_count(arch));
    enumerate_blocks(p, support_blocks(arch, counts), 0, [&](const ClickPattern& q) {
        if (!within_support(arch, counts, q)) return;
        double v = pattern_probability(arch, counts, q, params, theta_a, theta_b);
        if (v < 0.0) {
            // Sums of squares cannot go negative; kept as a guard.
            ++d.clipped;
            v = 0.0;
        }
        if (v > 0.0) d.entries[q] = v;
    });
    return d;
}

CondDistribution esr_cond_distribution(int n, int n_prime, double zeta_cd, double zeta_cchd,
                                       double theta_a, double theta_b) {
    return cond_distribution(Architecture::esr, {n, n_prime}, {zeta_cd, zeta_cchd, 0.5}, theta_a,
                             theta_b);
}

CondDistribution pqa_cond_distribution(int n, int n1, int n2, double zeta_cd, double zeta_cchd,
                                       double t, double theta_a, double theta_b) {
    return cond_distribution(Architecture::pqa, {n, n1, n2}, {zeta_cd, zeta_cchd, t}, theta_a,
                             theta_b);
}

CondDistribution two_esr_cond_distribution(int n1, int n2, int n3, double zeta_cd,
                                           double zeta_cchd, double theta_a, double theta_b) {
    return cond_distribution(Architecture::two_esr, {n1, n2, n3}, {zeta_cd, zeta_cchd, 0.5},
                             theta_a, theta_b);
}

CondDistribution unassisted_cond_distribution(int n, double eta_ch, double theta_a,
                                              double theta_b) {
    return cond_distribution(Architecture::unassisted, {n}, {1.0, eta_ch, 0.5}, theta_a, theta_b);
}

CondDistribution apply_dark_counts(const CondDistribution& dist, double p_d, int num_detectors) {
    if (p_d < 0.0 || p_d * num_detectors > 1.0) {
        throw std::invalid_argument("dark-count probability outside [0, 1/D]");
    }
    CondDistribution out = dist;
    out.entries.clear();
    out.noise_applied = true;
    const double keep = 1.0 - num_detectors * p_d;
    for (const auto& [pattern, prob] : dist.entries) {
        out.entries[pattern] += keep * prob;
        if (p_d == 0.0) continue;
        for (int i = 0; i < num_detectors; ++i) {
            ClickPattern succ = pattern;
            succ.set(i, pattern[i] + 1);
            out.entries[succ] += p_d * prob;
        }
    }
    return out;
}

bool flips_alice(Architecture arch) { return arch != Architecture::pqa; }

std::vector<int> canonical_herald(Architecture arch) {
    switch (arch) {
        case Architecture::esr:
        case Architecture::pqa: return {1, 1, 0, 0};
        case Architecture::two_esr: return {1, 1, 0, 0, 1, 1, 0, 0};
        case Architecture::unassisted: return {};
    }
    return {};
}

namespace {

int binary_outcome(int first, int second) { return (first == 1 && second == 0) ? 0 : 1; }

}  // namespace

BinaryOutcomeDistribution postprocess(const CondDistribution& dist, bool flip_alice) {
    BinaryOutcomeDistribution out;
    for (const auto& [pattern, prob] : dist.entries) {
        int a0 = pattern[0], a1 = pattern[1];
        if (flip_alice) std::swap(a0, a1);
        OutcomeKey key;
        key.a_alice = binary_outcome(a0, a1);
        key.a_bob = binary_outcome(pattern[2], pattern[3]);
        for (int i = 4; i < pattern.size; ++i) key.herald.push_back(pattern[i]);
        out.entries[key] += prob;
    }
    return out;
}

std::array<double, 4> HeraldTable::noisy(double p_d, int num_detectors) const {
    std::array<double, 4> out{};
    const double keep = 1.0 - num_detectors * p_d;
    for (int i = 0; i < 4; ++i) out[i] = keep * base[i] + p_d * neighbor[i];
    return out;
}

HeraldTable herald_table(Architecture arch, const std::vector<int>& counts,
                         const CircuitParams& params, double theta_a, double theta_b) {
    check_counts(arch, counts);
    const auto [na, nb] = party_bounds(arch, counts);
    const std::vector<int> omega = canonical_herald(arch);
    const int size = detector_count(arch);
    const bool flip = flips_alice(arch);

    // Herald variants: the canonical block, then each single decrement.
    std::vector<std::vector<int>> heralds{omega};
    for (std::size_t j = 0; j < omega.size(); ++j) {
        if (omega[j] == 0) continue;
        auto h = omega;
        --h[j];
        heralds.push_back(h);
    }

    // Dense grid over party counters, one layer per herald variant. Each
    // party axis runs to its bound + 1 so dark-count successors fit.
    const int da = na + 2, db = nb + 2;
    auto idx = [&](int a0, int a1, int b0, int b1) { return ((a0 * da + a1) * db + b0) * db + b1; };
    const std::size_t layer = static_cast<std::size_t>(da) * da * db * db;
    std::vector<double> grid(layer * heralds.size(), 0.0);
    for (std::size_t hv = 0; hv < heralds.size(); ++hv) {
        ClickPattern p;
        p.size = static_cast<std::uint8_t>(size);
        for (std::size_t j = 0; j < heralds[hv].size(); ++j) p.set(4 + int(j), heralds[hv][j]);
        for (int a0 = 0; a0 <= na; ++a0)
            for (int a1 = 0; a0 + a1 <= na; ++a1)
                for (int b0 = 0; b0 <= nb; ++b0)
                    for (int b1 = 0; b0 + b1 <= nb; ++b1) {
                        p.set(0, a0);
                        p.set(1, a1);
                        p.set(2, b0);
                        p.set(3, b1);
                        grid[hv * layer + idx(a0, a1, b0, b1)] =
                            pattern_probability(arch, counts, p, params, theta_a, theta_b);
                    }
    }

    HeraldTable table;
    for (int a0 = 0; a0 <= na + 1; ++a0)
        for (int a1 = 0; a0 + a1 <= na + 1; ++a1)
            for (int b0 = 0; b0 <= nb + 1; ++b0)
                for (int b1 = 0; b0 + b1 <= nb + 1; ++b1) {
                    const int outcome_a = flip ? binary_outcome(a1, a0) : binary_outcome(a0, a1);
                    const int cls = 2 * outcome_a + binary_outcome(b0, b1);
                    const std::size_t here = idx(a0, a1, b0, b1);
                    table.base[cls] += grid[here];
                    double nb_sum = 0.0;
                    if (a0 > 0) nb_sum += grid[idx(a0 - 1, a1, b0, b1)];
                    if (a1 > 0) nb_sum += grid[idx(a0, a1 - 1, b0, b1)];
                    if (b0 > 0) nb_sum += grid[idx(a0, a1, b0 - 1, b1)];
                    if (b1 > 0) nb_sum += grid[idx(a0, a1, b0, b1 - 1)];
                    for (std::size_t hv = 1; hv < heralds.size(); ++hv) {
                        nb_sum += grid[hv * layer + here];
                    }
                    table.neighbor[cls] += nb_sum;
                }
    return table;
}

struct HeraldCache::Impl {
    struct Key {
        Architecture arch;
        std::vector<int> counts;
        std::array<double, 5> values;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = std::hash<int>{}(static_cast<int>(k.arch));
            auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
            for (int c : k.counts) mix(std::hash<int>{}(c));
            for (double v : k.values) mix(std::hash<double>{}(v));
            return h;
        }
    };

    std::size_t capacity;
    mutable std::shared_mutex mutex;
    std::unordered_map<Key, HeraldTable, KeyHash> map;
    std::atomic<std::size_t> hits{0};
    std::atomic<std::size_t> misses{0};
};

HeraldCache::HeraldCache(std::size_t capacity) : impl_(std::make_unique<Impl>()) {
    impl_->capacity = capacity;
}

HeraldCache::~HeraldCache() = default;

HeraldTable HeraldCache::get(Architecture arch, const std::vector<int>& counts,
                             const CircuitParams& params, double theta_a, double theta_b) {
    // The split ratio only enters the amplified circuit.
    const double t = arch == Architecture::pqa ? quantize(params.t) : 0.0;
    const double zcd = arch == Architecture::unassisted ? 1.0 : quantize(params.zeta_cd);
    Impl::Key key{arch, counts,
                  {zcd, quantize(params.zeta_cchd), t, quantize(theta_a), quantize(theta_b)}};
    {
        std::shared_lock lock(impl_->mutex);
        auto it = impl_->map.find(key);
        if (it != impl_->map.end()) {
            ++impl_->hits;
            return it->second;
        }
    }
    // Evaluate at the quantized key so the stored table does not depend on
    // which caller populated the entry first.
    const CircuitParams quantized{key.values[0], key.values[1],
                                  arch == Architecture::pqa ? key.values[2] : params.t};
    HeraldTable table = herald_table(arch, counts, quantized, key.values[3], key.values[4]);
    std::unique_lock lock(impl_->mutex);
    ++impl_->misses;
    if (impl_->map.size() >= impl_->capacity) impl_->map.clear();
    impl_->map.emplace(std::move(key), table);
    return table;
}

std::size_t HeraldCache::size() const {
    std::shared_lock lock(impl_->mutex);
    return impl_->map.size();
}

std::size_t HeraldCache::hits() const { return impl_->hits.load(); }

std::size_t HeraldCache::misses() const { return impl_->misses.load(); }

void HeraldCache::set_capacity(std::size_t capacity) {
    if (capacity == 0) throw std::invalid_argument("herald cache capacity must be positive");
    std::unique_lock lock(impl_->mutex);
    impl_->capacity = capacity;
    if (impl_->map.size() >= capacity) impl_->map.clear();
}

void HeraldCache::clear() {
    std::unique_lock lock(impl_->mutex);
    impl_->map.clear();
    impl_->hits = 0;
    impl_->misses = 0;
}

HeraldCache& default_herald_cache() {
    static HeraldCache cache;
    return cache;
}

}  // namespace diqkd
