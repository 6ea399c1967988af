#include "commands.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include "diqkd/verify.hpp"

namespace diqkd::cli {

namespace {

template <class T>
std::vector<T> parallel_map(std::size_t count, int workers, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(count);
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next++; i < count; i = next++) out[i] = f(i);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
    drain();
    for (auto& t : pool) t.join();
    return out;
}

class CsvWriter {
  public:
    CsvWriter(const ScenarioConfig& c, const std::string& command,
              const std::vector<std::string>& columns)
        : path_(output_path(c, command, ".csv")), columns_(columns.size()) {
        file_.open(path_, std::ios::binary);
        if (!file_) throw ConfigError("cannot write " + path_.string());
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016" PRIx64, c.hash);
        file_ << "# diqkd-sweep " << kToolVersion << " command=" << command
              << " scenario=" << c.name << " security=" << c.security.label
              << " config_hash=" << hash << " seed=" << c.seed << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) file_ << (i ? "," : "") << columns[i];
        file_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("CSV row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) file_ << (i ? "," : "") << cells[i];
        file_ << "\n";
    }

    const std::filesystem::path& path() const { return path_; }

    static std::filesystem::path output_path(const ScenarioConfig& c, const std::string& command,
                                             const std::string& extension) {
        std::filesystem::path dir(c.out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
        return dir / (c.name + "_" + command + extension);
    }

  private:
    std::filesystem::path path_;
    std::size_t columns_;
    std::ofstream file_;
};

std::string csv_text(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

std::string intensity_cell(const SourceSpec& spec) {
    const bool tunable = spec.family == SourceFamily::pdc || spec.family == SourceFamily::triggered;
    return tunable ? format_number(spec.intensity) : "";
}

struct Point {
    double eta = 1.0;
    double loss = 0.0;
    double n_sh = 1.0;
};

struct PointResult {
    Point point;
    std::optional<OptimizationResult> result;
    std::string error;
};

SetupParams point_setup(const ScenarioConfig& c, const Point& p) {
    SetupParams s = c.setup;
    if (c.eta_sweep) s.eta_c = s.eta_d = p.eta;
    s.loss_db = p.loss;
    return s;
}

OptimizationResult evaluate_fixed(const ScenarioConfig& c, const SetupParams& s, double n_sh) {
    OptimizationResult r;
    r.setup = s;
    const HeraldedObservables obs = heralded_observables(s);
    const SecurityBudget budget = make_budget(c.security, c.protocol.f_pa, c.protocol.f_ir);
    const ProtocolParams proto{n_sh, c.protocol.gamma, delta_est_min(n_sh, budget.eps_rob_ea)};
    r.rate = key_length(obs, proto, budget);
    r.k_asymptotic = asymptotic_rate(obs);
    r.f_pa = c.protocol.f_pa;
    r.f_ir = c.protocol.f_ir;
    r.evaluations = 1;
    return r;
}

PointResult evaluate_point(const ScenarioConfig& c, const Point& p, bool optimize) {
    PointResult out{p, std::nullopt, ""};
    try {
        const SetupParams s = point_setup(c, p);
        out.result = optimize ? maximize_rate(s, c.security, p.n_sh, c.optimization)
                              : evaluate_fixed(c, s, p.n_sh);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

std::vector<Point> grid_points(const ScenarioConfig& c) {
    std::vector<Point> points;
    for (double eta : c.eta_grid)
        for (double n : c.n_grid)
            for (double loss : c.loss_grid) points.push_back({eta, loss, n});
    return points;
}

const std::vector<std::string> kRateColumns{
    "index",    "architecture", "security", "eta_c",    "eta_d",       "loss_db", "p_d",
    "n_sh",     "t",            "lambda_ab", "lambda_bc", "mu",        "gamma",   "f_pa",
    "f_ir",     "p_sh",         "omega_sh", "q_sh",     "s_sh",        "l",       "k_sh",
    "k",        "k_asymptotic", "n_expected", "feasible", "error"};

std::vector<std::string> rate_cells(std::size_t index, const ScenarioConfig& c, const PointResult& pr) {
    const SetupParams s = pr.result ? pr.result->setup : point_setup(c, pr.point);
    std::vector<std::string> cells{std::to_string(index),       to_string(s.arch),
                                   c.security.label,            format_number(s.eta_c),
                                   format_number(s.eta_d),      format_number(pr.point.loss),
                                   format_number(s.p_d),        format_number(pr.point.n_sh)};
    if (!pr.result) {
        cells.resize(kRateColumns.size() - 2);
        cells.push_back("0");
        cells.push_back(csv_text(pr.error));
        return cells;
    }
    const OptimizationResult& r = *pr.result;
    const HeraldedObservables& o = r.rate.observables;
    const bool finite = c.optimization.objective == Objective::finite_rate || !c.optimize;
    cells.push_back(s.arch == Architecture::pqa ? format_number(s.t) : "");
    cells.push_back(intensity_cell(s.source_ab));
    cells.push_back(s.arch == Architecture::esr || s.arch == Architecture::two_esr
                        ? intensity_cell(s.source_bc)
                        : "");
    cells.push_back(s.arch == Architecture::pqa ? intensity_cell(s.single_photon) : "");
    cells.push_back(finite ? format_number(r.rate.protocol.gamma) : "");
    cells.push_back(finite ? format_number(r.f_pa) : "");
    cells.push_back(finite ? format_number(r.f_ir) : "");
    cells.push_back(format_number(o.p_sh));
    cells.push_back(format_number(o.omega_sh));
    cells.push_back(format_number(o.q_sh));
    cells.push_back(format_number(o.s_sh));
    cells.push_back(finite ? format_number(r.rate.l) : "");
    cells.push_back(finite ? format_number(r.rate.k_cond) : "");
    cells.push_back(finite ? format_number(r.rate.k) : "");
    cells.push_back(format_number(r.k_asymptotic));
    cells.push_back(format_number(r.rate.n_expected));
    const bool feasible = finite ? r.rate.feasible : r.k_asymptotic > 0.0;
    cells.push_back(feasible ? "1" : "0");
    cells.push_back("");
    return cells;
}

/// Plot data: one gnuplot index block per curve. The x axis is the first
/// swept axis among loss, block size and efficiency.
void write_plot(const ScenarioConfig& c, const std::string& command,
                const std::vector<PointResult>& rows) {
    const auto path = CsvWriter::output_path(c, command, ".dat");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    enum { kLoss, kN, kEta } axis = kLoss;
    if (c.loss_grid.size() == 1 && c.n_grid.size() > 1) axis = kN;
    if (c.loss_grid.size() == 1 && c.n_grid.size() == 1 && c.eta_grid.size() > 1) axis = kEta;
    const char* names[] = {"loss_db", "n_sh", "eta_cd"};
    auto x_of = [&](const Point& p) { return axis == kLoss ? p.loss : axis == kN ? p.n_sh : p.eta; };
    auto curve_of = [&](const Point& p) {
        if (axis == kLoss) return "eta_cd=" + format_number(p.eta) + " n_sh=" + format_number(p.n_sh);
        if (axis == kN) return "eta_cd=" + format_number(p.eta) + " loss_db=" + format_number(p.loss);
        return "n_sh=" + format_number(p.n_sh) + " loss_db=" + format_number(p.loss);
    };
    std::string current;
    bool first = true;
    for (const auto& pr : rows) {
        const std::string curve = curve_of(pr.point);
        if (first || curve != current) {
            if (!first) f << "\n\n";
            f << "# curve " << curve << "\n# " << names[axis] << " k k_asymptotic\n";
            current = curve;
            first = false;
        }
        f << format_number(x_of(pr.point)) << " "
          << (pr.result ? format_number(pr.result->rate.k) : "nan") << " "
          << (pr.result ? format_number(pr.result->k_asymptotic) : "nan") << "\n";
    }
}

void print_point(std::ostream& out, const PointResult& pr, bool optimized) {
    if (!pr.result) {
        out << "error: " << pr.error << "\n";
        return;
    }
    const OptimizationResult& r = *pr.result;
    const HeraldedObservables& o = r.rate.observables;
    char line[512];
    std::snprintf(line, sizeof line,
                  "eta_cd=%.6g loss_db=%.6g n_sh=%.6g: P_SH=%.6e omega=%.9f Q=%.6e\n"
                  "  l=%.6e K_SH=%.6e K=%.6e K_inf=%.6e <N>=%.6e feasible=%d\n",
                  pr.point.eta, pr.point.loss, pr.point.n_sh, o.p_sh, o.omega_sh, o.q_sh,
                  r.rate.l, r.rate.k_cond, r.rate.k, r.k_asymptotic, r.rate.n_expected,
                  r.rate.feasible ? 1 : 0);
    out << line;
    if (optimized) {
        std::snprintf(line, sizeof line, "  gamma=%.4e f_pa=%.4f f_ir=%.4f t=%.4f evaluations=%d\n",
                      r.rate.protocol.gamma, r.f_pa, r.f_ir, r.setup.t, r.evaluations);
        out << line;
    }
}

int single_point(const ScenarioConfig& c, std::ostream& out, bool optimize, const std::string& command) {
    const Point p{c.eta_grid.front(), c.setup.loss_db, c.protocol.n_sh};
    PointResult pr = evaluate_point(c, p, optimize);
    CsvWriter csv(c, command, kRateColumns);
    csv.row(rate_cells(0, c, pr));
    print_point(out, pr, optimize);
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12e", value);
    return buf;
}

ScenarioConfig resolve_config(const Overrides& o) {
    ScenarioConfig c = o.config_path ? load_config(*o.config_path) : default_config();
    if (o.preset) {
        try {
            c.security = security_preset(*o.preset);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("--preset: ") + e.what());
        }
    }
    if (o.seed) c.seed = *o.seed;
    if (o.workers) {
        if (*o.workers < 0) throw ConfigError("--workers must be >= 0");
        c.workers = *o.workers;
    }
    if (o.out_dir) c.out_dir = *o.out_dir;
    // Overrides that change results are folded into the hash.
    c.hash = fnv1a64("preset=" + c.security.label + ";seed=" + std::to_string(c.seed), c.hash);
    finalize(c);
    default_herald_cache().set_capacity(c.cache_size);
    return c;
}

int run_rate(const ScenarioConfig& c, std::ostream& out) { return single_point(c, out, false, "rate"); }

int run_optimize(const ScenarioConfig& c, std::ostream& out) {
    return single_point(c, out, true, "optimize");
}

int run_observables(const ScenarioConfig& c, std::ostream& out) {
    std::vector<Point> points;
    for (double eta : c.eta_grid)
        for (double loss : c.loss_grid) points.push_back({eta, loss, c.protocol.n_sh});
    struct Row {
        SetupParams setup;
        HeraldedObservables obs;
        std::string error;
    };
    auto rows = parallel_map<Row>(points.size(), c.workers, [&](std::size_t i) {
        Row r{point_setup(c, points[i]), {}, ""};
        try {
            r.obs = heralded_observables(r.setup);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    });
    CsvWriter csv(c, "observables",
                  {"index", "architecture", "eta_c", "eta_d", "loss_db", "p_d", "t", "p_sh",
                   "p_omega", "p_trigger", "omega_sh", "q_sh", "s_sh", "n_expected", "feasible",
                   "error"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const auto& o = r.obs;
        const bool ok = r.error.empty();
        csv.row({std::to_string(i), to_string(r.setup.arch), format_number(r.setup.eta_c),
                 format_number(r.setup.eta_d), format_number(r.setup.loss_db),
                 format_number(r.setup.p_d),
                 r.setup.arch == Architecture::pqa ? format_number(r.setup.t) : "",
                 ok ? format_number(o.p_sh) : "", ok ? format_number(o.p_omega) : "",
                 ok ? format_number(o.p_trigger) : "", ok ? format_number(o.omega_sh) : "",
                 ok ? format_number(o.q_sh) : "", ok ? format_number(o.s_sh) : "",
                 ok ? format_number(expected_transmissions(c.protocol.n_sh, o.p_sh)) : "",
                 ok && o.feasible ? "1" : "0", csv_text(r.error)});
        char line[256];
        if (ok) {
            std::snprintf(line, sizeof line,
                          "eta_c=%.6g eta_d=%.6g loss_db=%.6g: P_SH=%.9e omega=%.12f Q=%.9e S=%.9f\n",
                          r.setup.eta_c, r.setup.eta_d, r.setup.loss_db, o.p_sh, o.omega_sh, o.q_sh,
                          o.s_sh);
            out << line;
        } else {
            out << "error: " << r.error << "\n";
        }
    }
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

int run_sweep(const ScenarioConfig& c, std::ostream& out) {
    const std::vector<Point> points = grid_points(c);
    auto rows = parallel_map<PointResult>(points.size(), c.workers, [&](std::size_t i) {
        return evaluate_point(c, points[i], c.optimize);
    });
    CsvWriter csv(c, "sweep", kRateColumns);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv.row(rate_cells(i, c, rows[i]));
        if (!rows[i].result) ++failures;
    }
    write_plot(c, "sweep", rows);
    out << "sweep: " << rows.size() << " points, " << failures << " with errors\n";
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

int run_critical_line(const ScenarioConfig& c, std::ostream& out) {
    struct Row {
        double eta;
        CriticalBlocksize crit;
        std::string error;
    };
    auto rows = parallel_map<Row>(c.eta_grid.size(), c.workers, [&](std::size_t i) {
        Row r{c.eta_grid[i], {}, ""};
        try {
            SetupParams s = c.setup;
            s.eta_c = s.eta_d = r.eta;
            r.crit = critical_blocksize(s, c.security, c.optimization, c.critical.threshold,
                                        c.critical.n_lo, c.critical.n_hi);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    });
    CsvWriter csv(c, "critical_line",
                  {"index", "architecture", "security", "eta_cd", "loss_db", "threshold", "n_star",
                   "k_at_n", "bounded", "error"});
    const auto plot_path = CsvWriter::output_path(c, "critical_line", ".dat");
    std::ofstream plot(plot_path, std::ios::binary);
    plot << "# curve security=" << c.security.label << "\n# eta_cd n_star\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const bool bounded = r.crit.n_sh.has_value();
        csv.row({std::to_string(i), to_string(c.setup.arch), c.security.label, format_number(r.eta),
                 format_number(c.setup.loss_db), format_number(c.critical.threshold),
                 bounded ? format_number(*r.crit.n_sh) : "inf",
                 bounded ? format_number(r.crit.k_at_n) : "", bounded ? "1" : "0",
                 csv_text(r.error)});
        if (bounded) plot << format_number(r.eta) << " " << format_number(*r.crit.n_sh) << "\n";
        char line[160];
        if (!r.error.empty()) {
            out << "eta_cd=" << r.eta << ": error: " << r.error << "\n";
        } else if (bounded) {
            std::snprintf(line, sizeof line, "eta_cd=%.6g: n_star=%.4e (K=%.3e)\n", r.eta,
                          *r.crit.n_sh, r.crit.k_at_n);
            out << line;
        } else {
            std::snprintf(line, sizeof line, "eta_cd=%.6g: unbounded\n", r.eta);
            out << line;
        }
    }
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

int run_max_loss(const ScenarioConfig& c, std::ostream& out) {
    std::vector<Point> points;
    for (double eta : c.eta_grid)
        for (double n : c.n_grid) points.push_back({eta, 0.0, n});
    struct Row {
        Point point;
        MaxLossResult max;
        std::string error;
    };
    auto rows = parallel_map<Row>(points.size(), c.workers, [&](std::size_t i) {
        Row r{points[i], {}, ""};
        try {
            r.max = max_tolerable_loss(point_setup(c, points[i]), c.security, points[i].n_sh,
                                       c.optimization, c.max_loss);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    });
    CsvWriter csv(c, "max_loss",
                  {"index", "architecture", "security", "eta_cd", "n_sh", "objective", "threshold",
                   "n_cap", "loss_max_db", "k_at_max", "n_expected_at_max", "found", "error"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const bool found = r.max.loss_db.has_value();
        const double k = r.max.at_max.rate_value(c.optimization.objective);
        csv.row({std::to_string(i), to_string(c.setup.arch), c.security.label,
                 format_number(r.point.eta), format_number(r.point.n_sh),
                 to_string(c.optimization.objective), format_number(c.max_loss.threshold),
                 format_number(c.max_loss.n_cap), found ? format_number(*r.max.loss_db) : "",
                 found ? format_number(k) : "",
                 found ? format_number(r.max.at_max.rate.n_expected) : "", found ? "1" : "0",
                 csv_text(r.error)});
        char line[200];
        if (!r.error.empty()) {
            out << "error: " << r.error << "\n";
        } else if (found) {
            std::snprintf(line, sizeof line,
                          "eta_cd=%.6g n_sh=%.3g: loss_max=%.2f dB (K=%.3e, <N>=%.3e)\n",
                          r.point.eta, r.point.n_sh, *r.max.loss_db, k, r.max.at_max.rate.n_expected);
            out << line;
        } else {
            std::snprintf(line, sizeof line, "eta_cd=%.6g n_sh=%.3g: infeasible at 0 dB\n",
                          r.point.eta, r.point.n_sh);
            out << line;
        }
    }
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

int run_qmax(const ScenarioConfig& c, std::ostream& out) {
    std::vector<Point> points;
    for (double eta : c.eta_grid)
        for (double loss : c.loss_grid) points.push_back({eta, loss, c.protocol.n_sh});
    struct Row {
        Point point;
        QMaxResult q;
        std::string error;
    };
    auto rows = parallel_map<Row>(points.size(), c.workers, [&](std::size_t i) {
        Row r{points[i], {}, ""};
        try {
            r.q = q_max_search(point_setup(c, points[i]), c.security, points[i].n_sh,
                               c.optimization, c.qmax.n_cap, c.qmax.q_lo, c.qmax.q_hi);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    });
    CsvWriter csv(c, "qmax",
                  {"index", "architecture", "security", "eta_cd", "loss_db", "n_sh", "n_cap",
                   "q_max", "feasible_at_zero", "error"});
    const auto plot_path = CsvWriter::output_path(c, "qmax", ".dat");
    std::ofstream plot(plot_path, std::ios::binary);
    double current_eta = -1.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        const bool ok = r.error.empty();
        csv.row({std::to_string(i), to_string(c.setup.arch), c.security.label,
                 format_number(r.point.eta), format_number(r.point.loss),
                 format_number(r.point.n_sh), format_number(c.qmax.n_cap),
                 ok ? format_number(r.q.q_max) : "", ok && r.q.feasible_at_zero ? "1" : "0",
                 csv_text(r.error)});
        if (r.point.eta != current_eta) {
            if (current_eta >= 0.0) plot << "\n\n";
            plot << "# curve eta_cd=" << format_number(r.point.eta) << "\n# loss_db q_max\n";
            current_eta = r.point.eta;
        }
        if (ok) plot << format_number(r.point.loss) << " " << format_number(r.q.q_max) << "\n";
        char line[160];
        if (ok) {
            std::snprintf(line, sizeof line, "eta_cd=%.6g loss_db=%.4g: q_max=%.4e\n", r.point.eta,
                          r.point.loss, r.q.q_max);
            out << line;
        } else {
            out << "error: " << r.error << "\n";
        }
    }
    out << "wrote " << csv.path().string() << "\n";
    return 0;
}

int run_verify(const std::string& scope, std::ostream& out) {
    std::vector<CheckReport> reports;
    try {
        reports = run_verification(scope);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    bool all_passed = true;
    for (const auto& r : reports) {
        char line[256];
        std::snprintf(line, sizeof line, "%-4s %-34s cases=%-5d max_dev=%.3e tol=%.1e", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.cases, r.max_deviation, r.tolerance);
        out << line;
        if (!r.passed) out << "  first failure: " << r.detail;
        out << "\n";
        all_passed = all_passed && r.passed;
    }
    return all_passed ? 0 : 1;
}

int run_session_time(double n_expected, double clock_hz, std::ostream& out) {
    double seconds = 0.0;
    try {
        seconds = session_time(n_expected, clock_hz);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    char line[200];
    std::snprintf(line, sizeof line, "<N>=%.4e clock=%.4e Hz: %.6e s = %.4f h = %.4f days\n",
                  n_expected, clock_hz, seconds, seconds / 3600.0, seconds / 86400.0);
    out << line;
    return 0;
}

}  // namespace diqkd::cli
