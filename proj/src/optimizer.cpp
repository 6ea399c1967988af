#include "diqkd/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "diqkd/numeric.hpp"

namespace diqkd {

namespace {

constexpr double kWorst = -1e300;
constexpr double kLogitBound = 30.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

template <class F>
void parallel_for(int count, int workers, F&& body) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

enum class Knob { t, lambda_ab, lambda_bc, mu };

struct Variable {
    Knob knob;
    bool log_scale;
    double lo;
    double hi;
};

double to_internal(const Variable& v, double value) {
    return v.log_scale ? std::log10(value) : value;
}

void apply(SetupParams& setup, const Variable& v, double internal) {
    const double value = v.log_scale ? std::pow(10.0, internal) : internal;
    switch (v.knob) {
        case Knob::t: setup.t = value; break;
        case Knob::lambda_ab: setup.source_ab.intensity = value; break;
        case Knob::lambda_bc: setup.source_bc.intensity = value; break;
        case Knob::mu: setup.single_photon.intensity = value; break;
    }
}

double current_value(const SetupParams& setup, const Variable& v) {
    switch (v.knob) {
        case Knob::t: return setup.t;
        case Knob::lambda_ab: return setup.source_ab.intensity;
        case Knob::lambda_bc: return setup.source_bc.intensity;
        case Knob::mu: return setup.single_photon.intensity;
    }
    return 0.0;
}

std::vector<Variable> physical_variables(const SetupParams& setup, const OptimizationSpec& spec) {
    std::vector<Variable> vars;
    auto log_var = [](Knob k, const Interval& b) {
        return Variable{k, true, std::log10(b.lo), std::log10(b.hi)};
    };
    if (spec.free_t && setup.arch == Architecture::pqa) {
        vars.push_back({Knob::t, false, spec.t_bounds.lo, spec.t_bounds.hi});
    }
    if (spec.free_intensities) {
        if (setup.source_ab.family == SourceFamily::pdc) {
            vars.push_back(log_var(Knob::lambda_ab, spec.lambda_bounds));
        }
        const bool relay = setup.arch == Architecture::esr || setup.arch == Architecture::two_esr;
        if (relay && setup.source_bc.family == SourceFamily::pdc) {
            vars.push_back(log_var(Knob::lambda_bc, spec.lambda_bounds));
        }
        if (setup.arch == Architecture::pqa &&
            setup.single_photon.family == SourceFamily::triggered) {
            vars.push_back(log_var(Knob::mu, spec.mu_bounds));
        }
    }
    return vars;
}

/// Search surrogate: the rate when positive, otherwise the per-round value so
/// infeasible regions still rank by how far they are from feasibility.
double finite_surrogate(const KeyRateResult& r) {
    if (!r.observables.feasible || !std::isfinite(r.l_raw)) return kWorst;
    if (r.l_raw > 0.0) return r.l_raw / r.n_expected;
    return r.l_raw / r.protocol.n_sh;
}

double asymptotic_surrogate(const HeraldedObservables& obs) {
    if (!obs.feasible) return kWorst;
    const double v = g_entropy(std::min(obs.omega_sh, (2.0 + std::sqrt(2.0)) / 4.0)) -
                     binary_entropy(obs.q_sh);
    return v > 0.0 ? obs.p_sh * v : v;
}

/// Cyclic coordinate ascent with golden-section line searches on boxes.
/// Returns the best value; x is updated in place.
double coordinate_ascent(const std::function<double(const std::vector<double>&)>& f,
                         std::vector<double>& x, const std::vector<double>& lo,
                         const std::vector<double>& hi, const std::vector<double>& width,
                         int sweeps, double tolerance, double start_value) {
    double best = start_value;
    for (int s = 0; s < sweeps; ++s) {
        const double before = best;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double a = std::max(lo[k], x[k] - width[k]);
            const double b = std::min(hi[k], x[k] + width[k]);
            auto line = [&](double v) {
                std::vector<double> y = x;
                y[k] = v;
                return f(y);
            };
            ScalarOptimum opt = golden_section_max(line, a, b, tolerance * (hi[k] - lo[k]));
            if (opt.value > best) {
                best = opt.value;
                x[k] = opt.x;
            }
        }
        if (best - before <= 1e-12 * std::fabs(before)) break;
    }
    return best;
}

}  // namespace

std::string to_string(Objective objective) {
    return objective == Objective::finite_rate ? "finite_rate" : "asymptotic_rate";
}

Objective objective_from_string(const std::string& name) {
    if (name == "finite_rate") return Objective::finite_rate;
    if (name == "asymptotic_rate") return Objective::asymptotic_rate;
    throw std::invalid_argument("unknown objective '" + name +
                                "' (expected finite_rate or asymptotic_rate)");
}

void OptimizationSpec::validate() const {
    if (!(f_pa > 0.0 && f_pa < 1.0) || !(f_ir > 0.0 && f_ir < 1.0)) {
        throw std::invalid_argument("budget fractions must lie in (0, 1)");
    }
    if (!(gamma_bounds.lo > 0.0 && gamma_bounds.lo <= gamma_bounds.hi && gamma_bounds.hi < 1.0)) {
        throw std::invalid_argument("gamma bounds must satisfy 0 < lo <= hi < 1");
    }
    if (!(gamma >= gamma_bounds.lo && gamma <= gamma_bounds.hi)) {
        throw std::invalid_argument("gamma outside its bounds");
    }
    if (!(t_bounds.lo > 0.0 && t_bounds.lo <= t_bounds.hi && t_bounds.hi < 1.0)) {
        throw std::invalid_argument("t bounds must satisfy 0 < lo <= hi < 1");
    }
    for (const Interval* b : {&lambda_bounds, &mu_bounds}) {
        if (!(b->lo > 0.0 && b->lo <= b->hi && std::isfinite(b->hi))) {
            throw std::invalid_argument("intensity bounds must satisfy 0 < lo <= hi");
        }
    }
    if (grid_points < 1 || starts < 1 || sweeps < 0 || random_restarts < 0 || workers < 1) {
        throw std::invalid_argument("grid_points, starts and workers must be positive");
    }
    if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("tolerance in (0, 1)");
}

double OptimizationResult::rate_value(Objective objective) const {
    return objective == Objective::finite_rate ? rate.k : k_asymptotic;
}

ProtocolChoice optimize_protocol(const HeraldedObservables& obs, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec) {
    // Coordinates: logit f_pa, logit f_ir, log10 gamma.
    std::vector<double> lo, hi, width;
    std::vector<int> which;
    std::vector<double> base{logit(spec.f_pa), logit(spec.f_ir), std::log10(spec.gamma)};
    if (spec.free_eps_split) {
        for (int k : {0, 1}) {
            which.push_back(k);
            lo.push_back(-kLogitBound);
            hi.push_back(kLogitBound);
        }
    }
    if (spec.free_gamma) {
        which.push_back(2);
        lo.push_back(std::log10(spec.gamma_bounds.lo));
        hi.push_back(std::log10(spec.gamma_bounds.hi));
    }
    auto full = [&](const std::vector<double>& x) {
        std::vector<double> y = base;
        for (std::size_t i = 0; i < which.size(); ++i) y[which[i]] = x[i];
        return y;
    };
    auto evaluate = [&](const std::vector<double>& y) {
        SecurityBudget budget = make_budget(targets, sigmoid(y[0]), sigmoid(y[1]));
        ProtocolParams proto{n_sh, std::pow(10.0, y[2]), delta_est_min(n_sh, budget.eps_rob_ea)};
        return key_length(obs, proto, budget);
    };
    auto objective = [&](const std::vector<double>& x) {
        return finite_surrogate(evaluate(full(x)));
    };

    std::vector<double> x;
    for (int k : which) x.push_back(base[k]);
    double best = objective(x);
    for (std::size_t i = 0; i < x.size(); ++i) width.push_back(kLogitBound / 3.0);
    if (spec.free_gamma) {
        // The rate is not unimodal in gamma (below the violation threshold
        // l_raw grows again as gamma shrinks), so seed it on a log grid and
        // refine only around the best grid point.
        constexpr int kGammaGrid = 24;
        const std::size_t g = which.size() - 1;
        const double step = (hi[g] - lo[g]) / kGammaGrid;
        std::vector<double> trial = x;
        for (int i = 0; i <= kGammaGrid; ++i) {
            trial[g] = lo[g] + step * i;
            double v = objective(trial);
            if (v > best) {
                best = v;
                x = trial;
            }
        }
        width[g] = step;
    }
    if (!x.empty()) {
        coordinate_ascent(objective, x, lo, hi, width, std::max(spec.sweeps, 1), 1e-4, best);
    }
    const std::vector<double> y = full(x);
    ProtocolChoice choice;
    choice.rate = evaluate(y);
    choice.f_pa = sigmoid(y[0]);
    choice.f_ir = sigmoid(y[1]);
    return choice;
}

OptimizationResult maximize_rate(const SetupParams& setup, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec) {
    spec.validate();
    setup.validate();
    if (!(n_sh > 0.0)) throw std::invalid_argument("n_sh must be positive");
    const std::vector<Variable> vars = physical_variables(setup, spec);
    const std::size_t d = vars.size();
    std::atomic<int> evaluations{0};

    auto evaluate = [&](const std::vector<double>& x) {
        ++evaluations;
        OptimizationResult r;
        r.setup = setup;
        for (std::size_t k = 0; k < d; ++k) apply(r.setup, vars[k], x[k]);
        const HeraldedObservables obs = heralded_observables(r.setup);
        r.k_asymptotic = asymptotic_rate(obs);
        if (spec.objective == Objective::asymptotic_rate) {
            r.surrogate = asymptotic_surrogate(obs);
            r.rate.observables = obs;
            r.rate.n_expected = expected_transmissions(n_sh, obs.p_sh);
            r.rate.protocol.n_sh = n_sh;
            return r;
        }
        ProtocolChoice choice = optimize_protocol(obs, targets, n_sh, spec);
        r.rate = choice.rate;
        r.f_pa = choice.f_pa;
        r.f_ir = choice.f_ir;
        r.surrogate = finite_surrogate(r.rate);
        return r;
    };
    auto surrogate = [&](const std::vector<double>& x) { return evaluate(x).surrogate; };

    if (d == 0) {
        OptimizationResult r = evaluate({});
        r.evaluations = evaluations;
        return r;
    }

    std::vector<double> lo(d), hi(d), width(d);
    for (std::size_t k = 0; k < d; ++k) {
        lo[k] = vars[k].lo;
        hi[k] = vars[k].hi;
        width[k] = (hi[k] - lo[k]) / spec.grid_points;
    }

    // Initial grid at cell centres, plus the configured starting values.
    std::vector<std::vector<double>> points;
    std::size_t cells = 1;
    for (std::size_t k = 0; k < d; ++k) cells *= spec.grid_points;
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> x(d);
        std::size_t rest = c;
        for (std::size_t k = 0; k < d; ++k) {
            const int i = static_cast<int>(rest % spec.grid_points);
            rest /= spec.grid_points;
            x[k] = lo[k] + (hi[k] - lo[k]) * (i + 0.5) / spec.grid_points;
        }
        points.push_back(std::move(x));
    }
    {
        std::vector<double> x(d);
        bool inside = true;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = current_value(setup, vars[k]);
            if (vars[k].log_scale && !(v > 0.0)) {
                inside = false;
                break;
            }
            x[k] = to_internal(vars[k], v);
            inside = inside && x[k] >= lo[k] && x[k] <= hi[k];
        }
        if (inside) points.push_back(std::move(x));
    }
    std::vector<double> values(points.size(), kWorst);
    parallel_for(static_cast<int>(points.size()), spec.workers,
                 [&](int i) { values[i] = surrogate(points[i]); });

    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    std::vector<std::vector<double>> starts;
    std::vector<double> start_values;
    for (int s = 0; s < spec.starts && s < static_cast<int>(order.size()); ++s) {
        starts.push_back(points[order[s]]);
        start_values.push_back(values[order[s]]);
    }
    if (spec.random_restarts > 0) {
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int r = 0; r < spec.random_restarts; ++r) {
            std::vector<double> x(d);
            for (std::size_t k = 0; k < d; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
            starts.push_back(x);
            start_values.push_back(kWorst);
        }
        parallel_for(spec.random_restarts, spec.workers, [&](int r) {
            const std::size_t i = starts.size() - spec.random_restarts + r;
            start_values[i] = surrogate(starts[i]);
        });
    }

    std::vector<double> refined(starts.size(), kWorst);
    parallel_for(static_cast<int>(starts.size()), spec.workers, [&](int i) {
        refined[i] = coordinate_ascent(surrogate, starts[i], lo, hi, width, spec.sweeps,
                                       spec.tolerance, start_values[i]);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (refined[i] > refined[best]) best = i;
    }
    OptimizationResult result = evaluate(starts[best]);
    result.evaluations = evaluations;
    return result;
}

CriticalBlocksize critical_blocksize(const SetupParams& setup, const SecurityTargets& targets,
                                     const OptimizationSpec& spec, double threshold, double n_lo,
                                     double n_hi) {
    if (!(n_lo > 0.0 && n_lo < n_hi)) throw std::invalid_argument("need 0 < n_lo < n_hi");
    CriticalBlocksize out;
    OptimizationSpec asym = spec;
    asym.objective = Objective::asymptotic_rate;
    if (maximize_rate(setup, targets, n_hi, asym).k_asymptotic < threshold) return out;

    OptimizationSpec finite = spec;
    finite.objective = Objective::finite_rate;
    auto rate = [&](double n) { return maximize_rate(setup, targets, n, finite).rate.k; };
    double k_hi = rate(n_hi);
    if (k_hi < threshold) return out;
    double k_lo = rate(n_lo);
    if (k_lo >= threshold) {
        out.n_sh = n_lo;
        out.k_at_n = k_lo;
        return out;
    }
    double lo = n_lo, hi = n_hi;
    while (hi / lo > 1.05) {
        const double mid = std::sqrt(lo * hi);
        const double k = rate(mid);
        if (k >= threshold) {
            hi = mid;
            k_hi = k;
        } else {
            lo = mid;
        }
    }
    out.n_sh = hi;
    out.k_at_n = k_hi;
    return out;
}

CriticalLineResult critical_line(const SetupParams& setup, const SecurityTargets& targets,
                                 const OptimizationSpec& spec, const std::vector<double>& eta_grid,
                                 double threshold, double n_lo, double n_hi) {
    CriticalLineResult out;
    out.label = targets.label;
    for (double eta : eta_grid) {
        SetupParams s = setup;
        s.eta_c = s.eta_d = eta;
        out.points.push_back({eta, critical_blocksize(s, targets, spec, threshold, n_lo, n_hi)});
    }
    return out;
}

MaxLossResult max_tolerable_loss(const SetupParams& setup, const SecurityTargets& targets,
                                 double n_sh, const OptimizationSpec& spec,
                                 const LossConstraints& c) {
    auto run = [&](double loss) {
        SetupParams s = setup;
        s.loss_db = loss;
        return maximize_rate(s, targets, n_sh, spec);
    };
    auto feasible = [&](const OptimizationResult& r) {
        const double v = r.rate_value(spec.objective);
        if (!(v > 0.0) || v < c.threshold) return false;
        if (c.n_cap > 0.0 && !(r.rate.n_expected <= c.n_cap)) return false;
        return true;
    };
    MaxLossResult out;
    OptimizationResult at_lo = run(0.0);
    if (!feasible(at_lo)) return out;
    double lo = 0.0, hi = 0.0;
    // Expand in 10 dB steps until the constraints fail.
    for (;;) {
        const double next = std::min(hi + 10.0, c.max_db);
        OptimizationResult r = run(next);
        if (!feasible(r)) {
            lo = hi;
            hi = next;
            break;
        }
        hi = next;
        at_lo = r;
        if (next >= c.max_db) {
            out.loss_db = c.max_db;
            out.at_max = r;
            return out;
        }
    }
    while (hi - lo > c.resolution_db) {
        const double mid = 0.5 * (lo + hi);
        OptimizationResult r = run(mid);
        if (feasible(r)) {
            lo = mid;
            at_lo = r;
        } else {
            hi = mid;
        }
    }
    out.loss_db = lo;
    out.at_max = at_lo;
    return out;
}

QMaxResult q_max_search(const SetupParams& setup, const SecurityTargets& targets, double n_sh,
                        const OptimizationSpec& spec, double n_cap, double q_lo, double q_hi) {
    if (!(q_lo > 0.0 && q_lo < q_hi)) throw std::invalid_argument("need 0 < q_lo < q_hi");
    OptimizationSpec finite = spec;
    finite.objective = Objective::finite_rate;
    auto feasible = [&](double q) {
        SetupParams s = setup;
        s.source_ab = SourceSpec{};
        s.source_bc = SourceSpec{};
        s.source_bc.family = SourceFamily::generic;
        s.source_bc.p0 = 0.0;
        s.source_bc.q = q;
        OptimizationResult r = maximize_rate(s, targets, n_sh, finite);
        return r.rate.feasible && (n_cap <= 0.0 || r.rate.n_expected <= n_cap);
    };
    QMaxResult out;
    out.feasible_at_zero = feasible(0.0);
    if (!out.feasible_at_zero || !feasible(q_lo)) return out;
    if (feasible(q_hi)) {
        out.q_max = q_hi;
        return out;
    }
    double lo = q_lo, hi = q_hi;
    while (hi / lo > 1.01) {
        const double mid = std::sqrt(lo * hi);
        if (feasible(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out.q_max = lo;
    return out;
}

}  // namespace diqkd
