#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace diqkd::cli {

namespace {

class Reader {
  public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& path,
                           const std::string& message) const {
        std::ostringstream os;
        os << source_;
        if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
        os << ": " << path << ": " << message;
        throw ConfigError(os.str());
    }

    void require_map(const YAML::Node& node, const std::string& path) const {
        if (!node.IsMap()) fail(node, path, "expected a mapping");
    }

    void allow_keys(const YAML::Node& node, const std::string& path,
                    std::initializer_list<const char*> keys) const {
        require_map(node, path);
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                std::string expected;
                for (const auto& k : allowed) expected += (expected.empty() ? "" : ", ") + k;
                fail(kv.first, join(path, key), "unknown key (allowed: " + expected + ")");
            }
        }
    }

    double number(const YAML::Node& node, const std::string& path) const {
        if (!node.IsScalar()) fail(node, path, "expected a number");
        try {
            const double v = node.as<double>();
            if (!std::isfinite(v)) fail(node, path, "expected a finite number");
            return v;
        } catch (const YAML::Exception&) {
            fail(node, path, "expected a number, got '" + node.Scalar() + "'");
        }
    }

    int integer(const YAML::Node& node, const std::string& path) const {
        const double v = number(node, path);
        if (v != std::floor(v) || std::fabs(v) > 1e9) fail(node, path, "expected an integer");
        return static_cast<int>(v);
    }

    bool boolean(const YAML::Node& node, const std::string& path) const {
        try {
            return node.as<bool>();
        } catch (const YAML::Exception&) {
            fail(node, path, "expected true or false");
        }
    }

    std::string text(const YAML::Node& node, const std::string& path) const {
        if (!node.IsScalar()) fail(node, path, "expected a string");
        return node.Scalar();
    }

    Interval interval(const YAML::Node& node, const std::string& path) const {
        if (!node.IsSequence() || node.size() != 2) fail(node, path, "expected [lo, hi]");
        Interval out{number(node[0], path), number(node[1], path)};
        if (!(out.lo <= out.hi)) fail(node, path, "lower bound exceeds upper bound");
        return out;
    }

    std::vector<double> grid(const YAML::Node& node, const std::string& path) const {
        std::vector<double> values;
        if (node.IsSequence()) {
            for (const auto& v : node) values.push_back(number(v, path));
        } else if (node.IsMap()) {
            allow_keys(node, path, {"from", "to", "step", "count", "log"});
            if (!node["from"] || !node["to"]) fail(node, path, "ranges need 'from' and 'to'");
            const double from = number(node["from"], join(path, "from"));
            const double to = number(node["to"], join(path, "to"));
            if (node["step"] && node["count"]) fail(node, path, "give either 'step' or 'count'");
            const bool log = node["log"] && boolean(node["log"], join(path, "log"));
            if (node["step"]) {
                if (log) fail(node, path, "'log' ranges take 'count', not 'step'");
                const double step = number(node["step"], join(path, "step"));
                if (!(step > 0.0)) fail(node["step"], join(path, "step"), "must be positive");
                const double n = std::floor((to - from) / step + 1e-9);
                if (n > 1e6) fail(node, path, "range has more than a million points");
                for (int i = 0; i <= static_cast<int>(n); ++i) values.push_back(from + i * step);
            } else if (node["count"]) {
                const int count = integer(node["count"], join(path, "count"));
                if (count < 1 || count > 1000000) fail(node["count"], join(path, "count"), "must be in [1, 1e6]");
                if (log && !(from > 0.0 && to > 0.0)) fail(node, path, "log ranges need positive ends");
                for (int i = 0; i < count; ++i) {
                    const double u = count == 1 ? 0.0 : double(i) / (count - 1);
                    values.push_back(log ? from * std::pow(to / from, u) : from + (to - from) * u);
                }
            } else {
                fail(node, path, "ranges need 'step' or 'count'");
            }
        } else {
            values.push_back(number(node, path));
        }
        if (values.empty()) fail(node, path, "grid is empty");
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (!(values[i] > values[i - 1])) fail(node, path, "grid must be strictly increasing");
        }
        return values;
    }

    static std::string join(const std::string& path, const std::string& key) {
        return path.empty() ? key : path + "." + key;
    }

  private:
    std::string source_;
};

SourceSpec read_source(const Reader& r, const YAML::Node& node, const std::string& path) {
    r.allow_keys(node, path, {"family", "intensity", "p0", "q", "probs", "n_max"});
    SourceSpec spec;
    if (!node["family"]) r.fail(node, path, "missing 'family'");
    try {
        spec.family = source_family_from_string(r.text(node["family"], path + ".family"));
    } catch (const std::invalid_argument& e) {
        r.fail(node["family"], path + ".family", e.what());
    }
    if (node["intensity"]) spec.intensity = r.number(node["intensity"], path + ".intensity");
    if (node["p0"]) spec.p0 = r.number(node["p0"], path + ".p0");
    if (node["q"]) spec.q = r.number(node["q"], path + ".q");
    if (node["n_max"]) spec.n_max = r.integer(node["n_max"], path + ".n_max");
    if (node["probs"]) {
        if (!node["probs"].IsSequence()) r.fail(node["probs"], path + ".probs", "expected a list");
        for (const auto& v : node["probs"]) spec.probs.push_back(r.number(v, path + ".probs"));
    }
    if ((spec.family == SourceFamily::pdc || spec.family == SourceFamily::triggered) &&
        !node["intensity"]) {
        r.fail(node, path, "family '" + to_string(spec.family) + "' needs 'intensity'");
    }
    if (spec.family == SourceFamily::custom && spec.probs.empty()) {
        r.fail(node, path, "family 'custom' needs 'probs'");
    }
    try {
        if (spec.family == SourceFamily::triggered) {
            triggered_source(spec.intensity, 1.0, 0.0, spec.n_max);
        } else {
            pair_statistics(spec);
        }
    } catch (const std::invalid_argument& e) {
        r.fail(node, path, e.what());
    }
    return spec;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ScenarioConfig default_config() {
    ScenarioConfig c;
    c.setup.p_d = 1e-7;
    return c;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source_name) {
    const Reader r(source_name);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source_name << ":" << e.mark.line + 1 << ": YAML syntax error: " << e.msg;
        throw ConfigError(os.str());
    }
    ScenarioConfig c = default_config();
    c.hash = fnv1a64(text);
    if (root.IsNull()) return c;
    r.allow_keys(root, "", {"name", "architecture", "setup", "sources", "security", "protocol",
                            "optimization", "grid", "max_loss", "critical_line", "qmax",
                            "session", "output", "run"});

    if (root["name"]) c.name = r.text(root["name"], "name");
    if (root["architecture"]) {
        try {
            c.setup.arch = architecture_from_string(r.text(root["architecture"], "architecture"));
        } catch (const std::invalid_argument& e) {
            r.fail(root["architecture"], "architecture", e.what());
        }
    }

    if (const auto s = root["setup"]) {
        r.allow_keys(s, "setup", {"eta_cd", "eta_c", "eta_d", "loss_db", "p_d", "t"});
        if (s["eta_cd"] && (s["eta_c"] || s["eta_d"])) {
            r.fail(s, "setup", "give either eta_cd or eta_c/eta_d");
        }
        if (s["eta_cd"]) c.setup.eta_c = c.setup.eta_d = r.number(s["eta_cd"], "setup.eta_cd");
        if (s["eta_c"]) c.setup.eta_c = r.number(s["eta_c"], "setup.eta_c");
        if (s["eta_d"]) c.setup.eta_d = r.number(s["eta_d"], "setup.eta_d");
        if (s["loss_db"]) c.setup.loss_db = r.number(s["loss_db"], "setup.loss_db");
        if (s["p_d"]) c.setup.p_d = r.number(s["p_d"], "setup.p_d");
        if (s["t"]) c.setup.t = r.number(s["t"], "setup.t");
        try {
            c.setup.validate();
        } catch (const std::invalid_argument& e) {
            r.fail(s, "setup", e.what());
        }
    }

    if (const auto s = root["sources"]) {
        r.allow_keys(s, "sources", {"ab", "bc", "single_photon"});
        if (s["ab"]) c.setup.source_ab = read_source(r, s["ab"], "sources.ab");
        if (s["bc"]) c.setup.source_bc = read_source(r, s["bc"], "sources.bc");
        if (s["single_photon"]) {
            c.setup.single_photon = read_source(r, s["single_photon"], "sources.single_photon");
            const auto f = c.setup.single_photon.family;
            if (f != SourceFamily::ideal && f != SourceFamily::triggered) {
                r.fail(s["single_photon"], "sources.single_photon",
                       "single-photon sources must be ideal or triggered");
            }
        }
        if (c.setup.source_ab.family == SourceFamily::triggered ||
            c.setup.source_bc.family == SourceFamily::triggered) {
            r.fail(s, "sources", "entanglement sources cannot be triggered");
        }
    }

    if (const auto s = root["security"]) {
        if (s.IsScalar()) {
            try {
                c.security = security_preset(s.Scalar());
            } catch (const std::invalid_argument& e) {
                r.fail(s, "security", e.what());
            }
        } else {
            r.allow_keys(s, "security", {"label", "eps_sec", "eps_cor", "eps_rob", "eps_ea"});
            for (const char* k : {"eps_sec", "eps_cor", "eps_rob", "eps_ea"}) {
                if (!s[k]) r.fail(s, "security", std::string("missing '") + k + "'");
            }
            c.security.label = s["label"] ? r.text(s["label"], "security.label") : "custom";
            c.security.eps_sec = r.number(s["eps_sec"], "security.eps_sec");
            c.security.eps_cor = r.number(s["eps_cor"], "security.eps_cor");
            c.security.eps_rob = r.number(s["eps_rob"], "security.eps_rob");
            c.security.eps_ea = r.number(s["eps_ea"], "security.eps_ea");
            try {
                make_budget(c.security, 0.5, 0.5);
            } catch (const std::invalid_argument& e) {
                r.fail(s, "security", e.what());
            }
        }
    }

    if (const auto s = root["protocol"]) {
        r.allow_keys(s, "protocol", {"n_sh", "gamma", "f_pa", "f_ir"});
        if (s["n_sh"]) c.protocol.n_sh = r.number(s["n_sh"], "protocol.n_sh");
        if (s["gamma"]) c.protocol.gamma = r.number(s["gamma"], "protocol.gamma");
        if (s["f_pa"]) c.protocol.f_pa = r.number(s["f_pa"], "protocol.f_pa");
        if (s["f_ir"]) c.protocol.f_ir = r.number(s["f_ir"], "protocol.f_ir");
        if (!(c.protocol.n_sh >= 1.0)) r.fail(s, "protocol.n_sh", "must be at least 1");
    }

    auto& o = c.optimization;
    if (const auto s = root["optimization"]) {
        r.allow_keys(s, "optimization",
                     {"enabled", "objective", "free_eps_split", "free_gamma", "free_t",
                      "free_intensities", "gamma_bounds", "t_bounds", "lambda_bounds",
                      "mu_bounds", "grid_points", "starts", "sweeps", "tolerance",
                      "random_restarts"});
        if (s["enabled"]) c.optimize = r.boolean(s["enabled"], "optimization.enabled");
        if (s["objective"]) {
            try {
                o.objective = objective_from_string(r.text(s["objective"], "optimization.objective"));
            } catch (const std::invalid_argument& e) {
                r.fail(s["objective"], "optimization.objective", e.what());
            }
        }
        auto flag = [&](const char* key, bool& field) {
            if (s[key]) field = r.boolean(s[key], std::string("optimization.") + key);
        };
        flag("free_eps_split", o.free_eps_split);
        flag("free_gamma", o.free_gamma);
        flag("free_t", o.free_t);
        flag("free_intensities", o.free_intensities);
        auto bounds = [&](const char* key, Interval& field) {
            if (s[key]) field = r.interval(s[key], std::string("optimization.") + key);
        };
        bounds("gamma_bounds", o.gamma_bounds);
        bounds("t_bounds", o.t_bounds);
        bounds("lambda_bounds", o.lambda_bounds);
        bounds("mu_bounds", o.mu_bounds);
        if (s["grid_points"]) o.grid_points = r.integer(s["grid_points"], "optimization.grid_points");
        if (s["starts"]) o.starts = r.integer(s["starts"], "optimization.starts");
        if (s["sweeps"]) o.sweeps = r.integer(s["sweeps"], "optimization.sweeps");
        if (s["tolerance"]) o.tolerance = r.number(s["tolerance"], "optimization.tolerance");
        if (s["random_restarts"]) {
            o.random_restarts = r.integer(s["random_restarts"], "optimization.random_restarts");
        }
    }
    o.f_pa = c.protocol.f_pa;
    o.f_ir = c.protocol.f_ir;
    o.gamma = std::clamp(c.protocol.gamma, o.gamma_bounds.lo, o.gamma_bounds.hi);
    try {
        o.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(root["optimization"] ? root["optimization"] : root["protocol"], "optimization",
               e.what());
    }

    if (const auto s = root["grid"]) {
        r.allow_keys(s, "grid", {"loss_db", "eta_cd", "n_sh"});
        if (s["loss_db"]) c.loss_grid = r.grid(s["loss_db"], "grid.loss_db");
        if (s["eta_cd"]) {
            c.eta_grid = r.grid(s["eta_cd"], "grid.eta_cd");
            c.eta_sweep = true;
        }
        if (s["n_sh"]) c.n_grid = r.grid(s["n_sh"], "grid.n_sh");
        for (double v : c.loss_grid)
            if (v < 0.0) r.fail(s["loss_db"], "grid.loss_db", "loss must be >= 0 dB");
        for (double v : c.eta_grid)
            if (!(v > 0.0 && v <= 1.0)) r.fail(s["eta_cd"], "grid.eta_cd", "efficiency must lie in (0, 1]");
        for (double v : c.n_grid)
            if (!(v >= 1.0)) r.fail(s["n_sh"], "grid.n_sh", "block sizes must be >= 1");
    }

    if (const auto s = root["max_loss"]) {
        r.allow_keys(s, "max_loss", {"threshold", "n_cap", "resolution_db", "max_db"});
        if (s["threshold"]) c.max_loss.threshold = r.number(s["threshold"], "max_loss.threshold");
        if (s["n_cap"]) c.max_loss.n_cap = r.number(s["n_cap"], "max_loss.n_cap");
        if (s["resolution_db"]) {
            c.max_loss.resolution_db = r.number(s["resolution_db"], "max_loss.resolution_db");
            if (!(c.max_loss.resolution_db > 0.0)) r.fail(s["resolution_db"], "max_loss.resolution_db", "must be positive");
        }
        if (s["max_db"]) c.max_loss.max_db = r.number(s["max_db"], "max_loss.max_db");
    }
    if (const auto s = root["critical_line"]) {
        r.allow_keys(s, "critical_line", {"threshold", "n_lo", "n_hi"});
        if (s["threshold"]) c.critical.threshold = r.number(s["threshold"], "critical_line.threshold");
        if (s["n_lo"]) c.critical.n_lo = r.number(s["n_lo"], "critical_line.n_lo");
        if (s["n_hi"]) c.critical.n_hi = r.number(s["n_hi"], "critical_line.n_hi");
        if (!(c.critical.n_lo > 0.0 && c.critical.n_lo < c.critical.n_hi)) {
            r.fail(s, "critical_line", "need 0 < n_lo < n_hi");
        }
    }
    if (const auto s = root["qmax"]) {
        r.allow_keys(s, "qmax", {"n_cap", "q_lo", "q_hi"});
        if (s["n_cap"]) c.qmax.n_cap = r.number(s["n_cap"], "qmax.n_cap");
        if (s["q_lo"]) c.qmax.q_lo = r.number(s["q_lo"], "qmax.q_lo");
        if (s["q_hi"]) c.qmax.q_hi = r.number(s["q_hi"], "qmax.q_hi");
        if (!(c.qmax.q_lo > 0.0 && c.qmax.q_lo < c.qmax.q_hi)) r.fail(s, "qmax", "need 0 < q_lo < q_hi");
    }
    if (const auto s = root["session"]) {
        r.allow_keys(s, "session", {"clock_hz"});
        if (s["clock_hz"]) c.clock_hz = r.number(s["clock_hz"], "session.clock_hz");
        if (!(c.clock_hz > 0.0)) r.fail(s, "session.clock_hz", "must be positive");
    }
    if (const auto s = root["output"]) {
        r.allow_keys(s, "output", {"dir"});
        if (s["dir"]) c.out_dir = r.text(s["dir"], "output.dir");
    }
    if (const auto s = root["run"]) {
        r.allow_keys(s, "run", {"workers", "seed", "cache_size"});
        if (s["workers"]) {
            c.workers = r.integer(s["workers"], "run.workers");
            if (c.workers < 0) r.fail(s["workers"], "run.workers", "must be >= 0 (0 = all cores)");
        }
        if (s["seed"]) {
            const int seed = r.integer(s["seed"], "run.seed");
            if (seed < 0) r.fail(s["seed"], "run.seed", "must be >= 0");
            c.seed = static_cast<std::uint64_t>(seed);
        }
        if (s["cache_size"]) {
            const int size = r.integer(s["cache_size"], "run.cache_size");
            if (size < 1) r.fail(s["cache_size"], "run.cache_size", "must be positive");
            c.cache_size = static_cast<std::size_t>(size);
        }
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

void finalize(ScenarioConfig& c) {
    if (c.loss_grid.empty()) c.loss_grid = {c.setup.loss_db};
    // Without an efficiency axis the configured (possibly unequal) pair is
    // kept and the axis value only labels the rows.
    if (c.eta_grid.empty()) c.eta_grid = {std::sqrt(c.setup.zeta_cd())};
    if (c.n_grid.empty()) c.n_grid = {c.protocol.n_sh};
    if (c.workers == 0) c.workers = std::max(1u, std::thread::hardware_concurrency());
    c.optimization.workers = 1;
    c.optimization.seed = c.seed;
    try {
        c.setup.validate();
        c.optimization.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace diqkd::cli
