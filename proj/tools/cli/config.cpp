#include "config.hpp"

#include "mdyn/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mdyn::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"system", {"kind", "seed", "T", "tau", "discard"}},
        {"linear_gaussian", {"a11", "a12", "a21", "a22", "eps", "sigma_x", "sigma_y", "dt"}},
        {"l96", {"K", "J", "F", "hx", "hy", "eps", "dt"}},
        {"tbh", {"Lambda", "beta", "dt"}},
        {"delay", {"m", "n"}},
        {"basis", {"kind", "degree", "cap", "modes", "energy"}},
        {"fit", {"lambda", "train_rows"}},
        {"closure", {"substeps", "residual_noise"}},
        {"predict", {"init_index", "steps", "members", "cases", "case_stride", "perturbation_sd"}},
        {"evaluate", {"stats", "max_lag", "bins", "leads"}},
        {"oracle", {"m", "omega_points"}},
        {"paths", {"data", "model", "truth", "forecasts"}},
    };
    return s;
}

void check_schema(const pt::ptree& tree, const std::string& source) {
    for (const auto& [section, body] : tree) {
        const auto it = schema().find(section);
        if (body.empty()) {
            throw ConfigError(section, source + ": key outside of any section");
        }
        if (it == schema().end()) throw ConfigError(section, source + ": unknown section");
        for (const auto& kv : body) {
            if (!it->second.count(kv.first)) throw ConfigError(section + "." + kv.first, source + ": unknown key");
        }
    }
}

template <class T>
T parse_number(const std::string& key, const std::string& raw, const char* kind) {
    const std::string s = boost::algorithm::trim_copy(raw);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(key, std::string("expected ") + kind + ", got '" + raw + "'");
    }
    return v;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

Config Config::parse(const std::string& text, const std::string& source) {
    Config c;
    c.text_ = text;
    c.source_ = source;
    std::istringstream in(text);
    try {
        pt::read_ini(in, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", source + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    check_schema(c.tree_, source);
    return c;
}

bool Config::has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }

std::string Config::get_string(const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError(key, "required key is missing");
    return boost::algorithm::trim_copy(*v);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const double v = parse_number<double>(key, get_string(key), "a number");
    require(std::isfinite(v), key, "must be finite");
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const { return parse_number<long>(key, get_string(key), "an integer"); }

long Config::get_int(const std::string& key, long fallback) const { return has(key) ? get_int(key) : fallback; }

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = boost::algorithm::to_lower_copy(get_string(key));
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::string> parts;
    const std::string raw = get_string(key);
    boost::algorithm::split(parts, raw, boost::is_any_of(", "), boost::token_compress_on);
    std::vector<std::string> out;
    for (auto& p : parts)
        if (!p.empty()) out.push_back(p);
    return out;
}

std::vector<long> Config::get_int_list(const std::string& key, const std::vector<long>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<long> out;
    for (const auto& p : get_list(key, {})) out.push_back(parse_number<long>(key, p, "a list of integers"));
    return out;
}

int Experiment::nx() const noexcept {
    switch (system) {
        case SystemKind::l96: return l96.K;
        case SystemKind::tbh: return 2;
        default: return 1;
    }
}

int Experiment::ny() const noexcept {
    switch (system) {
        case SystemKind::l96: return l96.K;
        case SystemKind::tbh: return 4;
        default: return 1;
    }
}

std::string Experiment::system_name() const {
    switch (system) {
        case SystemKind::l96: return "l96";
        case SystemKind::tbh: return "tbh";
        default: return "linear_gaussian";
    }
}

Experiment read_experiment(const Config& cfg, std::optional<std::uint64_t> seed_override) {
    Experiment e;
    const std::string kind = cfg.get_string("system.kind");
    if (kind == "linear_gaussian") e.system = SystemKind::linear_gaussian;
    else if (kind == "l96") e.system = SystemKind::l96;
    else if (kind == "tbh") e.system = SystemKind::tbh;
    else throw ConfigError("system.kind", "expected linear_gaussian, l96 or tbh, got '" + kind + "'");

    if (seed_override) {
        e.seed = *seed_override;
    } else {
        if (!cfg.has("system.seed")) throw ConfigError("system.seed", "required key is missing (no default seed)");
        const long s = cfg.get_int("system.seed");
        require(s >= 0, "system.seed", "must be >= 0");
        e.seed = static_cast<std::uint64_t>(s);
    }
    e.T = cfg.get_double("system.T", 0.0);
    e.tau = cfg.get_double("system.tau", 0.01);
    e.discard = cfg.get_double("system.discard", 0.0);
    require(e.T >= 0.0, "system.T", "must be >= 0");
    require(e.tau > 0.0, "system.tau", "must be > 0");
    require(e.discard >= 0.0, "system.discard", "must be >= 0");

    double dt = 0.0;
    switch (e.system) {
        case SystemKind::linear_gaussian: {
            auto& p = e.lg;
            p.a11 = cfg.get_double("linear_gaussian.a11", p.a11);
            p.a12 = cfg.get_double("linear_gaussian.a12", p.a12);
            p.a21 = cfg.get_double("linear_gaussian.a21", p.a21);
            p.a22 = cfg.get_double("linear_gaussian.a22", p.a22);
            p.eps = cfg.get_double("linear_gaussian.eps", p.eps);
            p.sigma_x = cfg.get_double("linear_gaussian.sigma_x", p.sigma_x);
            p.sigma_y = cfg.get_double("linear_gaussian.sigma_y", p.sigma_y);
            require(p.eps > 0.0, "linear_gaussian.eps", "must be > 0");
            try {
                p.validate();
            } catch (const mdyn::InvalidArgument& ex) {
                throw ConfigError("linear_gaussian", ex.what());
            }
            e.lg_dt = cfg.get_double("linear_gaussian.dt", default_linear_dt(p));
            require(e.lg_dt > 0.0, "linear_gaussian.dt", "must be > 0");
            dt = e.lg_dt;
            break;
        }
        case SystemKind::l96: {
            auto& p = e.l96;
            p.K = static_cast<int>(cfg.get_int("l96.K", p.K));
            p.J = static_cast<int>(cfg.get_int("l96.J", p.J));
            p.F = cfg.get_double("l96.F", p.F);
            p.hx = cfg.get_double("l96.hx", p.hx);
            p.hy = cfg.get_double("l96.hy", p.hy);
            p.eps = cfg.get_double("l96.eps", p.eps);
            require(p.K >= 4, "l96.K", "must be >= 4");
            require(p.J >= 1, "l96.J", "must be >= 1");
            require(p.eps > 0.0, "l96.eps", "must be > 0");
            e.l96_dt = cfg.get_double("l96.dt", e.l96_dt);
            require(e.l96_dt > 0.0, "l96.dt", "must be > 0");
            dt = e.l96_dt;
            break;
        }
        case SystemKind::tbh: {
            auto& p = e.tbh;
            p.Lambda = static_cast<int>(cfg.get_int("tbh.Lambda", p.Lambda));
            p.beta = cfg.get_double("tbh.beta", p.beta);
            p.dt = cfg.get_double("tbh.dt", p.dt);
            require(p.Lambda >= 2, "tbh.Lambda", "must be >= 2");
            require(p.beta > 0.0, "tbh.beta", "must be > 0");
            require(p.dt > 0.0, "tbh.dt", "must be > 0");
            dt = p.dt;
            break;
        }
    }

    e.delay.m = static_cast<int>(cfg.get_int("delay.m", 0));
    e.delay.n = static_cast<int>(cfg.get_int("delay.n", 0));
    require(e.delay.m >= -1, "delay.m", "must be >= -1");
    require(e.delay.n >= 0, "delay.n", "must be >= 0");
    require(e.delay.m >= 0 || e.delay.n >= 1, "delay.n", "must be >= 1 when delay.m = -1");

    const std::string bk = cfg.get_string("basis.kind", "hermite");
    if (bk == "hermite") {
        e.hermite = true;
        e.degree = static_cast<int>(cfg.get_int("basis.degree", 3));
        e.cap = static_cast<int>(cfg.get_int("basis.cap", e.degree));
        require(e.degree >= 0, "basis.degree", "must be >= 0");
        require(e.cap >= 0, "basis.cap", "must be >= 0");
    } else if (bk == "pod") {
        e.hermite = false;
        require(!(cfg.has("basis.modes") && cfg.has("basis.energy")), "basis.energy",
                "give either basis.modes or basis.energy, not both");
        if (cfg.has("basis.energy")) {
            e.pod_energy = cfg.get_double("basis.energy");
            require(*e.pod_energy > 0.0 && *e.pod_energy <= 1.0, "basis.energy", "must lie in (0, 1]");
        } else if (cfg.has("basis.modes")) {
            e.pod_modes = static_cast<int>(cfg.get_int("basis.modes"));
            require(*e.pod_modes >= 1, "basis.modes", "must be >= 1");
        }
    } else {
        throw ConfigError("basis.kind", "expected hermite or pod, got '" + bk + "'");
    }
    e.lambda = cfg.get_double("fit.lambda", 0.0);
    require(e.lambda >= 0.0, "fit.lambda", "must be >= 0");
    e.train_rows = cfg.get_int("fit.train_rows", 0);
    require(e.train_rows >= 0, "fit.train_rows", "must be >= 0");

    const long default_sub = std::max(1L, std::lround(e.tau / dt));
    e.substeps = static_cast<int>(cfg.get_int("closure.substeps", default_sub));
    require(e.substeps >= 1, "closure.substeps", "must be >= 1");
    e.residual_noise = cfg.get_bool("closure.residual_noise", false);

    e.init_index = cfg.get_int("predict.init_index", e.delay.depth());
    e.steps = cfg.get_int("predict.steps", 100);
    e.members = cfg.get_int("predict.members", 1);
    e.cases = cfg.get_int("predict.cases", 1);
    e.case_stride = cfg.get_int("predict.case_stride", 100);
    e.perturbation_sd = cfg.get_double("predict.perturbation_sd", 0.0);
    require(e.init_index >= e.delay.depth(), "predict.init_index", "must be >= the delay depth max(m, n)");
    require(e.steps >= 1, "predict.steps", "must be >= 1");
    require(e.members >= 1, "predict.members", "must be >= 1");
    require(e.cases >= 1, "predict.cases", "must be >= 1");
    require(e.case_stride >= 1, "predict.case_stride", "must be >= 1");
    require(e.perturbation_sd >= 0.0, "predict.perturbation_sd", "must be >= 0");

    e.stats = cfg.get_list("evaluate.stats", {"acf", "pdf", "skill"});
    static const std::set<std::string> known{"acf", "ccf", "pdf", "wave", "skill", "rank", "sup"};
    for (const auto& s : e.stats) require(known.count(s) > 0, "evaluate.stats", "unknown statistic '" + s + "'");
    e.max_lag = static_cast<int>(cfg.get_int("evaluate.max_lag", 100));
    e.bins = static_cast<int>(cfg.get_int("evaluate.bins", 50));
    e.leads = cfg.get_int_list("evaluate.leads", {e.steps});
    require(e.max_lag >= 0, "evaluate.max_lag", "must be >= 0");
    require(e.bins >= 1, "evaluate.bins", "must be >= 1");
    for (long l : e.leads) require(l >= 0 && l <= e.steps, "evaluate.leads", "leads must lie in [0, predict.steps]");

    e.oracle_m = static_cast<int>(cfg.get_int("oracle.m", 50));
    e.omega_points = static_cast<int>(cfg.get_int("oracle.omega_points", 1024));
    require(e.oracle_m >= 0, "oracle.m", "must be >= 0");
    require(e.omega_points >= 2, "oracle.omega_points", "must be >= 2");

    e.data = cfg.get_string("paths.data", "");
    e.model = cfg.get_string("paths.model", "");
    e.truth = cfg.get_string("paths.truth", "");
    e.forecasts = cfg.get_string("paths.forecasts", "");
    return e;
}

}  // namespace mdyn::cli
