#include "diqkd/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace diqkd::oracle {

namespace {

// Plain factorials; the oracle never goes beyond a few dozen photons.
double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double choose(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

void prune(std::map<Occupation, std::complex<double>>& amps, const OracleOptions& options) {
    if (!options.prune) return;
    for (auto it = amps.begin(); it != amps.end();) {
        if (std::abs(it->second) < options.prune_threshold) {
            it = amps.erase(it);
        } else {
            ++it;
        }
    }
}

// Generic two-mode linear map on creation operators:
//   x -> axx x + axy y,   y -> ayx x + ayy y.
FockState apply_two_mode(const FockState& state, int ix, int iy, double axx, double axy,
                         double ayx, double ayy, const OracleOptions& options) {
    FockState out(state.mode_set(), state.truncation());
    auto& dst = out.amplitudes();
    for (const auto& [occ, amp] : state.amplitudes()) {
        const int nx = occ[ix];
        const int ny = occ[iy];
        const int total = nx + ny;
        const double norm_in = std::sqrt(factorial(nx) * factorial(ny));
        for (int r = 0; r <= nx; ++r) {
            // r photons from x stay in x, nx - r go to y.
            const double cx = choose(nx, r) * std::pow(axx, r) * std::pow(axy, nx - r);
            if (cx == 0.0) continue;
            for (int s = 0; s <= ny; ++s) {
                // s photons from y land in x, ny - s stay in y.
                const double cy = choose(ny, s) * std::pow(ayx, s) * std::pow(ayy, ny - s);
                if (cy == 0.0) continue;
                const int out_x = r + s;
                const int out_y = total - out_x;
                const double norm_out = std::sqrt(factorial(out_x) * factorial(out_y));
                Occupation next = occ;
                next[ix] = static_cast<std::uint8_t>(out_x);
                next[iy] = static_cast<std::uint8_t>(out_y);
                dst[next] += amp * (cx * cy * norm_out / norm_in);
            }
        }
    }
    prune(dst, options);
    return out;
}

}  // namespace

std::string ModeIndex::to_string() const {
    return spatial + (pol == Pol::h ? "_h" : "_v");
}

ModeSet::ModeSet(std::vector<std::string> spatial_labels) {
    std::sort(spatial_labels.begin(), spatial_labels.end());
    if (std::adjacent_find(spatial_labels.begin(), spatial_labels.end()) != spatial_labels.end()) {
        throw std::invalid_argument("ModeSet: duplicate spatial label");
    }
    for (const auto& label : spatial_labels) {
        modes_.push_back({label, Pol::h});
        modes_.push_back({label, Pol::v});
    }
}

int ModeSet::index(const ModeIndex& mode) const {
    auto it = std::lower_bound(modes_.begin(), modes_.end(), mode);
    if (it == modes_.end() || *it != mode) {
        throw std::invalid_argument("ModeSet: unknown mode " + mode.to_string());
    }
    return static_cast<int>(it - modes_.begin());
}

bool ModeSet::contains(const ModeIndex& mode) const {
    return std::binary_search(modes_.begin(), modes_.end(), mode);
}

FockState::FockState(std::shared_ptr<const ModeSet> modes, int truncation)
    : modes_(std::move(modes)), truncation_(truncation) {
    if (!modes_) throw std::invalid_argument("FockState: null mode set");
    if (truncation < 0) throw std::invalid_argument("FockState: negative truncation");
}

FockState FockState::vacuum(std::shared_ptr<const ModeSet> modes) {
    FockState s(modes, 0);
    s.amplitudes_[Occupation(modes->size(), 0)] = 1.0;
    return s;
}

std::complex<double> FockState::amplitude(const Occupation& occ) const {
    auto it = amplitudes_.find(occ);
    return it == amplitudes_.end() ? std::complex<double>{} : it->second;
}

double FockState::norm_squared() const {
    double s = 0.0;
    for (const auto& [occ, amp] : amplitudes_) s += std::norm(amp);
    return s;
}

FockState build_pair_state(int n, const std::pair<ModeIndex, ModeIndex>& a,
                           const std::pair<ModeIndex, ModeIndex>& b,
                           std::shared_ptr<const ModeSet> modes, int truncation, PairForm form) {
    if (n < 0) throw std::invalid_argument("build_pair_state: negative pair count");
    if (truncation < 2 * n) {
        throw std::invalid_argument("build_pair_state: truncation bound " +
                                    std::to_string(truncation) + " is below 2n = " +
                                    std::to_string(2 * n));
    }
    FockState state(modes, truncation);
    const int ah = modes->index(a.first), av = modes->index(a.second);
    const int bh = modes->index(b.first), bv = modes->index(b.second);
    Occupation base(modes->size(), 0);
    if (form == PairForm::twin) {
        Occupation occ = base;
        occ[ah] = static_cast<std::uint8_t>(n);
        occ[bh] = static_cast<std::uint8_t>(n);
        // (a b)^n / n! |0> = |n, n>.
        state.amplitudes()[occ] = 1.0;
        return state;
    }
    // (a_h b_v - a_v b_h)^n expanded binomially; branch i carries i factors
    // of (-a_v b_h). Each monomial a_h^(n-i) a_v^i b_h^i b_v^(n-i) maps to the
    // normalized basis vector with weight (n-i)! i!.
    const double pref = 1.0 / (factorial(n) * std::sqrt(double(n + 1)));
    for (int i = 0; i <= n; ++i) {
        Occupation occ = base;
        occ[ah] = static_cast<std::uint8_t>(n - i);
        occ[av] = static_cast<std::uint8_t>(i);
        occ[bh] = static_cast<std::uint8_t>(i);
        occ[bv] = static_cast<std::uint8_t>(n - i);
        const double sign = (i % 2) ? -1.0 : 1.0;
        state.amplitudes()[occ] =
            pref * sign * choose(n, i) * factorial(i) * factorial(n - i);
    }
    return state;
}

FockState build_number_state(const std::vector<std::pair<ModeIndex, int>>& counts,
                             std::shared_ptr<const ModeSet> modes) {
    Occupation occ(modes->size(), 0);
    int total = 0;
    for (const auto& [mode, c] : counts) {
        if (c < 0) throw std::invalid_argument("build_number_state: negative count");
        occ[modes->index(mode)] = static_cast<std::uint8_t>(c);
        total += c;
    }
    FockState state(modes, total);
    state.amplitudes()[occ] = 1.0;
    return state;
}

FockState tensor_product(const FockState& x, const FockState& y) {
    if (x.mode_set() != y.mode_set() && x.modes().modes() != y.modes().modes()) {
        throw std::invalid_argument("tensor_product: states use different mode sets");
    }
    const int m = x.modes().size();
    std::vector<bool> used_x(m, false), used_y(m, false);
    for (const auto& [occ, amp] : x.amplitudes())
        for (int i = 0; i < m; ++i) used_x[i] = used_x[i] || occ[i] > 0;
    for (const auto& [occ, amp] : y.amplitudes())
        for (int i = 0; i < m; ++i) used_y[i] = used_y[i] || occ[i] > 0;
    for (int i = 0; i < m; ++i) {
        if (used_x[i] && used_y[i]) {
            throw std::invalid_argument("tensor_product: states overlap on mode " +
                                        x.modes().modes()[i].to_string());
        }
    }
    FockState out(x.mode_set(), x.truncation() + y.truncation());
    for (const auto& [ox, ax] : x.amplitudes()) {
        for (const auto& [oy, ay] : y.amplitudes()) {
            Occupation occ(m);
            for (int i = 0; i < m; ++i) occ[i] = static_cast<std::uint8_t>(ox[i] + oy[i]);
            out.amplitudes()[occ] += ax * ay;
        }
    }
    return out;
}

FockState apply_bs(const FockState& state, const ModeIndex& x, const ModeIndex& y,
                   double transmittance, const OracleOptions& options) {
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument("apply_bs: transmittance outside [0,1]");
    }
    if (x == y) throw std::invalid_argument("apply_bs: input modes must differ");
    const int ix = state.modes().index(x);
    const int iy = state.modes().index(y);
    const double tt = std::sqrt(transmittance);
    const double rr = std::sqrt(1.0 - transmittance);
    return apply_two_mode(state, ix, iy, tt, rr, -rr, tt, options);
}

FockState apply_bs(const FockState& state, const std::string& x, const std::string& y,
                   double transmittance, const OracleOptions& options) {
    FockState s = apply_bs(state, ModeIndex{x, Pol::h}, ModeIndex{y, Pol::h}, transmittance, options);
    return apply_bs(s, ModeIndex{x, Pol::v}, ModeIndex{y, Pol::v}, transmittance, options);
}

FockState apply_rotation(const FockState& state, const std::string& spatial, double theta,
                         const OracleOptions& options) {
    const int ih = state.modes().index({spatial, Pol::h});
    const int iv = state.modes().index({spatial, Pol::v});
    const double c = std::cos(theta), s = std::sin(theta);
    return apply_two_mode(state, ih, iv, c, s, -s, c, options);
}

CondDistribution measure_pnr(const FockState& state, const std::vector<ModeIndex>& detector_modes) {
    std::vector<int> idx;
    std::set<int> seen;
    for (const auto& m : detector_modes) {
        int i = state.modes().index(m);
        if (!seen.insert(i).second) {
            throw std::invalid_argument("measure_pnr: detector mode list is not disjoint (" +
                                        m.to_string() + ")");
        }
        idx.push_back(i);
    }
    CondDistribution dist;
    std::vector<int> counts(idx.size());
    for (const auto& [occ, amp] : state.amplitudes()) {
        for (std::size_t k = 0; k < idx.size(); ++k) counts[k] = occ[idx[k]];
        dist.entries[ClickPattern(counts)] += std::norm(amp);
    }
    return dist;
}

namespace {

using Pair = std::pair<ModeIndex, ModeIndex>;

Pair pol_pair(const std::string& label) { return {{label, Pol::h}, {label, Pol::v}}; }

std::vector<ModeIndex> detectors(const std::vector<std::string>& labels) {
    std::vector<ModeIndex> out;
    for (const auto& l : labels) {
        out.push_back({l, Pol::h});
        out.push_back({l, Pol::v});
    }
    return out;
}

void check_counts(const std::vector<int>& counts, std::size_t expected, const char* what) {
    if (counts.size() != expected) {
        throw std::invalid_argument(std::string("oracle_cond_distribution: ") + what +
                                    " expects " + std::to_string(expected) + " photon numbers");
    }
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("oracle_cond_distribution: negative photon number");
    }
}

}  // namespace

CondDistribution oracle_cond_distribution(Architecture arch, const std::vector<int>& counts,
                                          const CircuitParams& params, double theta_a,
                                          double theta_b, const OracleOptions& options) {
    const double half = 0.5;
    const double quarter_turn = std::acos(-1.0) / 4.0;
    CondDistribution dist;
    switch (arch) {
        case Architecture::esr: {
            check_counts(counts, 2, "esr");
            auto modes = std::make_shared<const ModeSet>(
                std::vector<std::string>{"a", "b", "c", "d", "f", "g", "p", "q"});
            const int n = counts[0], np = counts[1];
            FockState s = tensor_product(
                build_pair_state(n, pol_pair("a"), pol_pair("b"), modes, 2 * n),
                build_pair_state(np, pol_pair("c"), pol_pair("d"), modes, 2 * np));
            s = apply_bs(s, "a", "f", params.zeta_cd, options);
            s = apply_bs(s, "b", "g", params.zeta_cchd, options);
            s = apply_bs(s, "c", "p", params.zeta_cd, options);
            s = apply_bs(s, "d", "q", params.zeta_cd, options);
            s = apply_bs(s, "b", "c", half, options);
            s = apply_rotation(s, "a", theta_a, options);
            s = apply_rotation(s, "d", theta_b, options);
            dist = measure_pnr(s, detectors({"a", "d", "c", "b"}));
            break;
        }
        case Architecture::pqa: {
            check_counts(counts, 3, "pqa");
            auto modes = std::make_shared<const ModeSet>(
                std::vector<std::string>{"a", "b", "c", "d", "f", "g", "p"});
            const int n = counts[0];
            FockState s = tensor_product(
                build_pair_state(n, pol_pair("a"), pol_pair("b"), modes, 2 * n),
                build_number_state({{{"d", Pol::h}, counts[1]}, {{"d", Pol::v}, counts[2]}}, modes));
            s = apply_bs(s, "a", "f", params.zeta_cd, options);
            s = apply_bs(s, "b", "g", params.zeta_cchd, options);
            s = apply_bs(s, "d", "p", params.zeta_cd, options);
            s = apply_bs(s, "d", "c", params.t, options);
            s = apply_rotation(s, "d", quarter_turn, options);
            s = apply_rotation(s, "c", quarter_turn, options);
            s = apply_bs(s, "b", "c", half, options);
            s = apply_rotation(s, "a", theta_a, options);
            s = apply_rotation(s, "d", theta_b, options);
            dist = measure_pnr(s, detectors({"a", "d", "c", "b"}));
            break;
        }
        case Architecture::two_esr: {
            check_counts(counts, 3, "two_esr");
            auto modes = std::make_shared<const ModeSet>(std::vector<std::string>{
                "a", "b", "c", "d", "e", "f", "la", "lb", "lc", "ld", "le", "lf"});
            const int n1 = counts[0], n2 = counts[1], n3 = counts[2];
            FockState s = tensor_product(
                tensor_product(build_pair_state(n1, pol_pair("a"), pol_pair("b"), modes, 2 * n1),
                               build_pair_state(n2, pol_pair("e"), pol_pair("f"), modes, 2 * n2)),
                build_pair_state(n3, pol_pair("c"), pol_pair("d"), modes, 2 * n3));
            s = apply_bs(s, "a", "la", params.zeta_cchd, options);
            s = apply_bs(s, "b", "lb", params.zeta_cchd, options);
            s = apply_bs(s, "e", "le", params.zeta_cd, options);
            s = apply_bs(s, "f", "lf", params.zeta_cd, options);
            s = apply_bs(s, "c", "lc", params.zeta_cd, options);
            s = apply_bs(s, "d", "ld", params.zeta_cd, options);
            s = apply_bs(s, "a", "e", half, options);
            s = apply_bs(s, "b", "c", half, options);
            s = apply_rotation(s, "f", theta_a, options);
            s = apply_rotation(s, "d", theta_b, options);
            dist = measure_pnr(s, detectors({"f", "d", "e", "a", "c", "b"}));
            break;
        }
        case Architecture::unassisted: {
            check_counts(counts, 1, "unassisted");
            auto modes = std::make_shared<const ModeSet>(std::vector<std::string>{"a", "b", "g"});
            const int n = counts[0];
            FockState s = build_pair_state(n, pol_pair("a"), pol_pair("b"), modes, 2 * n);
            s = apply_bs(s, "b", "g", params.zeta_cchd, options);
            s = apply_rotation(s, "a", theta_a, options);
            s = apply_rotation(s, "b", theta_b, options);
            dist = measure_pnr(s, detectors({"a", "b"}));
            break;
        }
    }
    dist.arch = arch;
    dist.conditioning = counts;
    dist.params = params;
    dist.theta_a = theta_a;
    dist.theta_b = theta_b;
    return dist;
}

}  // namespace diqkd::oracle
