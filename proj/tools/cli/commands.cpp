#include "commands.hpp"

#include "mdyn/basis.hpp"
#include "mdyn/closure.hpp"
#include "mdyn/embedding.hpp"
#include "mdyn/errors.hpp"
#include "mdyn/matrix_io.hpp"
#include "mdyn/parallel.hpp"
#include "mdyn/spectral.hpp"
#include "mdyn/stats.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef MDYN_VERSION
#define MDYN_VERSION "0.0.0"
#endif

namespace mdyn::cli {

namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::vector<int> split_ints(const std::string& s, const fs::path& src) {
    std::vector<int> out;
    if (s.empty()) return out;
    for (auto tok : io::split(s, ',')) out.push_back(static_cast<int>(io::parse_double(tok, src.string())));
    return out;
}

fs::path require_path(const fs::path& p, const std::string& what) {
    if (p.empty()) throw UsageError(what);
    return p;
}

void check_layout(const Experiment& e, const TimeSeriesDataset& ds, const fs::path& src) {
    if (ds.nx() != e.nx() || ds.ny() != e.ny()) {
        throw UsageError(src.string() + ": dataset has " + std::to_string(ds.nx()) + " x and " +
                         std::to_string(ds.ny()) + " y columns, system '" + e.system_name() + "' needs " +
                         std::to_string(e.nx()) + " and " + std::to_string(e.ny()));
    }
}

void write_dataset(const Experiment& e, const TimeSeriesDataset& ds, const fs::path& path) {
    if (e.system == SystemKind::tbh) write_csv(ds, path, tbh_column_names());
    else write_csv(ds, path);
}

std::vector<ComponentEstimator> component_layout(const Experiment& e) {
    std::vector<ComponentEstimator> c;
    switch (e.system) {
        case SystemKind::linear_gaussian: c.push_back({nullptr, {0}, {0}, {0}}); break;
        case SystemKind::l96:
            for (int k = 0; k < e.l96.K; ++k) c.push_back({nullptr, {k}, {k}, {k}});
            break;
        case SystemKind::tbh:
            // y = (u2_re, u2_im, F_re, F_im); each part conditions on the matching part of u1
            for (int j = 0; j < 4; ++j) c.push_back({nullptr, {j % 2}, {j}, {j}});
            break;
    }
    return c;
}

struct Bundle {
    std::vector<ComponentEstimator> components;
    Matrix residual_cov;
};

Bundle load_bundle(const Experiment& e, const fs::path& dir) {
    const fs::path meta = dir / "bundle.ini";
    const io::KeyValues kv = io::read_key_values(meta);
    if (io::require_key(kv, "format_version", meta) != "1") throw IoError(meta.string() + ": unsupported bundle");
    const std::string sys = io::require_key(kv, "system", meta);
    if (sys != e.system_name()) {
        throw ConfigError("system.kind", "model bundle was trained for '" + sys + "', config says '" +
                                             e.system_name() + "'");
    }
    const int m = std::stoi(io::require_key(kv, "delay.m", meta));
    const int n = std::stoi(io::require_key(kv, "delay.n", meta));
    if (m != e.delay.m || n != e.delay.n) {
        throw ConfigError("delay.m", "model bundle was trained with m = " + std::to_string(m) + ", n = " +
                                         std::to_string(n));
    }
    const int count = std::stoi(io::require_key(kv, "components", meta));
    Bundle b;
    for (int i = 0; i < count; ++i) {
        const std::string p = "c" + std::to_string(i);
        ComponentEstimator c;
        c.x_cols = split_ints(io::require_key(kv, p + ".x_cols", meta), meta);
        c.y_cols = split_ints(io::require_key(kv, p + ".y_cols", meta), meta);
        c.outputs = split_ints(io::require_key(kv, p + ".outputs", meta), meta);
        c.model = std::make_shared<ConditionalExpectationModel>(ConditionalExpectationModel::load(dir, p + "_"));
        b.components.push_back(std::move(c));
    }
    b.residual_cov = io::read_matrix_csv(dir / "residual_noise.csv");
    return b;
}

ClosureModel build_closure(const Experiment& e, std::shared_ptr<const YPredictor> pred) {
    switch (e.system) {
        case SystemKind::l96: return l96_closure(e.l96, std::move(pred), e.delay, e.tau, e.substeps);
        case SystemKind::tbh: return tbh_closure(std::move(pred), e.delay, e.tau, e.substeps);
        default: return linear_gaussian_closure(e.lg, std::move(pred), e.delay, e.tau, e.substeps);
    }
}

Vector curve_mean(const std::vector<Vector>& v) {
    Vector m = Vector::Zero(v.front().size());
    for (const auto& x : v) m += x;
    return m / static_cast<double>(v.size());
}

struct ForecastSet {
    std::vector<long> init_index;
    long members = 0;
    long steps = 0;
    std::vector<std::vector<TimeSeriesDataset>> paths;  // [case][member]
};

ForecastSet load_forecasts(const fs::path& dir) {
    const fs::path meta = dir / "forecasts.ini";
    const io::KeyValues kv = io::read_key_values(meta);
    ForecastSet f;
    const long cases = std::stol(io::require_key(kv, "cases", meta));
    f.members = std::stol(io::require_key(kv, "members", meta));
    f.steps = std::stol(io::require_key(kv, "steps", meta));
    for (long c = 0; c < cases; ++c) {
        f.init_index.push_back(std::stol(io::require_key(kv, "case" + std::to_string(c) + ".init_index", meta)));
        std::vector<TimeSeriesDataset> row;
        for (long e = 0; e < f.members; ++e) {
            row.push_back(read_csv(dir / ("case" + std::to_string(c) + "_member" + std::to_string(e) + ".csv")));
        }
        f.paths.push_back(std::move(row));
    }
    return f;
}

Matrix stack_rows(const std::vector<const Matrix*>& parts) {
    Eigen::Index rows = 0;
    for (const auto* p : parts) rows += p->rows();
    Matrix out(rows, parts.front()->cols());
    Eigen::Index r = 0;
    for (const auto* p : parts) {
        out.middleRows(r, p->rows()) = *p;
        r += p->rows();
    }
    return out;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string version_string() { return MDYN_VERSION; }

void write_manifest(const RunContext& ctx, const fs::path& dir) {
    io::KeyValues kv;
    kv["command"] = ctx.command;
    kv["config_sha256"] = sha256_hex(ctx.config_text);
    kv["seed"] = std::to_string(ctx.exp.seed);
    kv["system"] = ctx.exp.system_name();
    kv["mdyn_version"] = version_string();
    kv["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION);
    io::write_key_values(kv, dir / "manifest.ini");
}

void cmd_generate(const RunContext& ctx) {
    const Experiment& e = ctx.exp;
    if (!(e.T >= e.tau)) throw ConfigError("system.T", "must be >= system.tau to store at least one sample");
    fs::create_directories(ctx.out);
    Rng rng = make_stream(e.seed, 1);
    io::KeyValues info;
    switch (e.system) {
        case SystemKind::linear_gaussian: {
            LinearGaussianOptions o;
            o.dt = e.lg_dt;
            // discard by simulating and dropping the leading rows
            const auto run = simulate_linear_gaussian(e.lg, e.T + e.discard, e.tau, rng, o);
            const auto skip = static_cast<std::size_t>(std::llround(e.discard / e.tau));
            const TimeSeriesDataset ds = run.data.slice(skip, run.data.size() - skip);
            write_dataset(e, TimeSeriesDataset(e.tau, ds.x(), ds.y()), ctx.out / "data.csv");
            break;
        }
        case SystemKind::l96: {
            const auto run = simulate_l96(e.l96, e.T, e.tau, e.l96_dt, l96_initial_condition(e.l96, rng), e.discard);
            write_dataset(e, run.data, ctx.out / "data.csv");
            break;
        }
        case SystemKind::tbh: {
            const auto run = simulate_tbh(e.tbh, tbh_initial_condition(e.tbh, rng), e.T, e.tau, e.discard);
            write_dataset(e, run.data, ctx.out / "data.csv");
            info["max_energy_drift"] = io::format_double(run.max_energy_drift);
            info["max_reality_error"] = io::format_double(run.max_reality_error);
            info["max_identity_error"] = io::format_double(run.max_identity_error);
            break;
        }
    }
    if (!info.empty()) io::write_key_values(info, ctx.out / "diagnostics.ini");
    write_manifest(ctx, ctx.out);
}

void cmd_train(const RunContext& ctx) {
    const Experiment& e = ctx.exp;
    const fs::path src = require_path(e.data, "train needs a dataset: --data PATH or paths.data");
    TimeSeriesDataset ds = read_csv(src);
    check_layout(e, ds, src);
    if (e.train_rows > 0) {
        if (static_cast<std::size_t>(e.train_rows) > ds.size()) {
            throw ConfigError("fit.train_rows", "dataset has only " + std::to_string(ds.size()) + " rows");
        }
        ds = ds.slice(0, static_cast<std::size_t>(e.train_rows));
    }
    std::vector<ComponentEstimator> comps = component_layout(e);
    std::vector<double> residual(comps.size());
    parallel_for(comps.size(), ctx.threads, [&](std::size_t i) {
        ComponentEstimator& c = comps[i];
        const DesignMatrices full = build_delay_states(ds.select(c.x_cols, c.y_cols), e.delay);
        const auto pos = std::find(c.y_cols.begin(), c.y_cols.end(), c.outputs.front()) - c.y_cols.begin();
        DesignMatrices dm{full.Z, full.G.col(pos), full.row_index};
        const Basis basis = e.hermite ? Basis(fit_hermite(dm.Z, e.degree, e.cap))
                                      : Basis(fit_pod(dm.Z, e.pod_modes ? ModeSelection(ModeCount{*e.pod_modes})
                                                                        : ModeSelection(EnergyFraction{
                                                                              e.pod_energy.value_or(1.0)})));
        auto model = std::make_shared<ConditionalExpectationModel>(fit_conditional_expectation(dm, basis, e.lambda));
        residual[i] = model->residual_cov()(0, 0);
        c.model = std::move(model);
    });

    const fs::path dir = ctx.out;
    fs::create_directories(dir);
    io::KeyValues kv;
    kv["format_version"] = "1";
    kv["system"] = e.system_name();
    kv["delay.m"] = std::to_string(e.delay.m);
    kv["delay.n"] = std::to_string(e.delay.n);
    kv["tau"] = io::format_double(ds.tau());
    kv["train_rows"] = std::to_string(ds.size());
    kv["components"] = std::to_string(comps.size());
    Matrix rcov = Matrix::Zero(e.ny(), e.ny());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string p = "c" + std::to_string(i);
        kv[p + ".x_cols"] = join(comps[i].x_cols);
        kv[p + ".y_cols"] = join(comps[i].y_cols);
        kv[p + ".outputs"] = join(comps[i].outputs);
        kv[p + ".residual_variance"] = io::format_double(residual[i]);
        comps[i].model->save(dir, p + "_");
        rcov(comps[i].outputs.front(), comps[i].outputs.front()) = residual[i];
    }
    // TBH: only the forcing F gets residual noise
    if (e.system == SystemKind::tbh) rcov.topLeftCorner(2, 2).setZero();
    io::write_key_values(kv, dir / "bundle.ini");
    io::write_matrix_csv(rcov, dir / "residual_noise.csv");
    write_manifest(ctx, dir);
}

void cmd_predict(const RunContext& ctx) {
    const Experiment& e = ctx.exp;
    const fs::path model_dir = require_path(e.model, "predict needs a model bundle: --model DIR or paths.model");
    const fs::path src = require_path(e.data, "predict needs a dataset to start from: --data PATH or paths.data");
    const TimeSeriesDataset ds = read_csv(src);
    check_layout(e, ds, src);
    Bundle b = load_bundle(e, model_dir);

    ClosureModel model = build_closure(e, std::make_shared<EmbeddingPredictor>(b.components, e.delay, e.ny()));
    if (e.residual_noise) model.set_residual_noise(b.residual_cov);
    model.divergence_bound = divergence_bound_from(ds);

    std::vector<ClosureState> seeds;
    std::vector<long> starts;
    for (long c = 0; c < e.cases; ++c) {
        const long i = e.init_index + c * e.case_stride;
        if (i >= static_cast<long>(ds.size())) {
            throw ConfigError("predict.cases", "case " + std::to_string(c) + " starts at row " + std::to_string(i) +
                                                   ", past the end of the dataset (" + std::to_string(ds.size()) +
                                                   " rows)");
        }
        seeds.push_back(seed_state(ds, static_cast<std::size_t>(i), e.delay));
        starts.push_back(i);
    }
    EnsembleSpec spec;
    spec.members = static_cast<std::size_t>(e.members);
    spec.steps = static_cast<std::size_t>(e.steps);
    spec.perturbation_sd = e.perturbation_sd;
    spec.base_seed = e.seed;
    spec.threads = ctx.threads;
    const auto runs = ensemble_simulate(model, seeds, spec);

    fs::create_directories(ctx.out);
    io::KeyValues kv;
    kv["cases"] = std::to_string(e.cases);
    kv["members"] = std::to_string(e.members);
    kv["steps"] = std::to_string(e.steps);
    kv["tau"] = io::format_double(e.tau);
    for (std::size_t c = 0; c < runs.size(); ++c) {
        kv["case" + std::to_string(c) + ".init_index"] = std::to_string(starts[c]);
        for (std::size_t m = 0; m < runs[c].size(); ++m) {
            const Trajectory& tr = runs[c][m];
            const TimeSeriesDataset out(e.tau, tr.x, tr.y, ds.time(static_cast<std::size_t>(starts[c])));
            write_dataset(e, out, ctx.out / ("case" + std::to_string(c) + "_member" + std::to_string(m) + ".csv"));
        }
    }
    io::write_key_values(kv, ctx.out / "forecasts.ini");
    write_manifest(ctx, ctx.out);
}

void cmd_evaluate(const RunContext& ctx) {
    const Experiment& e = ctx.exp;
    if (e.truth.empty() || e.forecasts.empty()) {
        throw UsageError(
            "evaluate needs both inputs:\n"
            "  truth dataset        --truth PATH or paths.truth\n"
            "  forecast directory   --forecasts DIR or paths.forecasts (written by `mdyn predict`)");
    }
    const TimeSeriesDataset truth = read_csv(e.truth);
    check_layout(e, truth, e.truth);
    const ForecastSet f = load_forecasts(e.forecasts);

    std::vector<Matrix> truth_seg;
    std::vector<std::vector<Matrix>> fc;
    std::vector<const Matrix*> fx_all, fy_all;
    for (std::size_t c = 0; c < f.paths.size(); ++c) {
        const long i0 = f.init_index[c];
        if (i0 + f.steps >= static_cast<long>(truth.size())) {
            throw UsageError("truth dataset is too short for forecast case " + std::to_string(c));
        }
        truth_seg.push_back(truth.x().middleRows(i0, f.steps + 1));
        std::vector<Matrix> members;
        for (const auto& p : f.paths[c]) {
            if (p.nx() != truth.nx()) throw UsageError("forecast and truth column counts differ");
            members.push_back(p.x());
            fx_all.push_back(&p.x());
            fy_all.push_back(&p.y());
        }
        fc.push_back(std::move(members));
    }

    fs::create_directories(ctx.out);
    io::KeyValues summary;
    auto has = [&](const char* s) { return std::find(e.stats.begin(), e.stats.end(), s) != e.stats.end(); };
    const double tau = truth.tau();

    if (has("acf") || has("ccf")) {
        if (e.max_lag >= f.steps + 1) throw ConfigError("evaluate.max_lag", "must be below predict.steps + 1");
    }
    if (has("acf")) {
        const auto ta = acf_columns(truth.x(), e.max_lag, tau);
        std::vector<Vector> per;
        for (const auto* x : fx_all) per.push_back(acf_columns(*x, e.max_lag, tau).values);
        const Vector fa = curve_mean(per);
        Matrix out(ta.values.size(), 3);
        out << ta.abscissa, ta.values, fa;
        io::write_matrix_csv(out, ctx.out / "acf.csv", {"lag", "truth", "forecast"});
        summary["acf_max_abs_error"] = io::format_double((ta.values - fa).cwiseAbs().maxCoeff());
    }
    if (has("ccf")) {
        const auto tc = ccf(truth.x().col(0), truth.y().col(0), e.max_lag, tau);
        std::vector<Vector> per;
        for (std::size_t i = 0; i < fx_all.size(); ++i) {
            per.push_back(ccf(fx_all[i]->col(0), fy_all[i]->col(0), e.max_lag, tau).values);
        }
        Matrix out(tc.values.size(), 3);
        out << tc.abscissa, tc.values, curve_mean(per);
        io::write_matrix_csv(out, ctx.out / "ccf.csv", {"lag", "truth", "forecast"});
    }
    if (has("pdf")) {
        const Matrix fx = stack_rows(fx_all);
        const Vector tv = truth.x().reshaped();
        const Vector fv = fx.reshaped();
        const double lo = std::min(tv.minCoeff(), fv.minCoeff());
        double hi = std::max(tv.maxCoeff(), fv.maxCoeff());
        if (!(hi > lo)) hi = lo + 1.0;
        const auto tp = pdf_estimate(tv, e.bins, lo, hi);
        const auto fp = pdf_estimate(fv, e.bins, lo, hi);
        Matrix out(e.bins, 3);
        out << tp.histogram.abscissa, tp.histogram.values, fp.histogram.values;
        io::write_matrix_csv(out, ctx.out / "pdf.csv", {"x", "truth", "forecast"});
        summary["pdf_l1_distance"] = io::format_double(histogram_l1_distance(tv, fv, e.bins, lo, hi));
    }
    if (has("wave")) {
        if (truth.nx() < 2) throw ConfigError("evaluate.stats", "wave statistics need more than one resolved column");
        const auto tw = wave_statistics(truth.x());
        const auto fw = wave_statistics(stack_rows(fx_all));
        Matrix out(tw.wavenumber.size(), 5);
        out << tw.wavenumber, tw.mean_amplitude, tw.variance, fw.mean_amplitude, fw.variance;
        io::write_matrix_csv(out, ctx.out / "wave.csv",
                             {"wavenumber", "truth_amplitude", "truth_variance", "forecast_amplitude",
                              "forecast_variance"});
    }
    if (has("skill")) {
        const Vector clim = truth.x().colwise().mean().transpose();
        const auto s = rmse_ancr(truth_seg, fc, clim, tau);
        Matrix out(s.rmse.values.size(), 3);
        out << s.rmse.abscissa, s.rmse.values, s.ancr.values;
        io::write_matrix_csv(out, ctx.out / "skill.csv", {"t", "rmse", "ancr"});
    }
    if (has("rank")) {
        std::vector<int> leads;
        for (long l : e.leads) {
            if (l > f.steps) throw ConfigError("evaluate.leads", "lead " + std::to_string(l) + " exceeds the forecast");
            leads.push_back(static_cast<int>(l));
        }
        Rng rng = make_stream(e.seed, 3);
        const auto counts = rank_histogram(truth_seg, fc, leads, rng);
        Matrix out(static_cast<Eigen::Index>(counts.size()), 2);
        for (std::size_t r = 0; r < counts.size(); ++r) out.row(static_cast<Eigen::Index>(r)) << r, counts[r];
        io::write_matrix_csv(out, ctx.out / "rank.csv", {"rank", "count"});
        const auto chi = chi_square_flatness(counts);
        summary["rank_chi_square"] = io::format_double(chi.statistic);
        summary["rank_dof"] = std::to_string(chi.dof);
        summary["rank_p_value"] = io::format_double(chi.p_value);
    }
    if (has("sup")) {
        std::vector<Matrix> a, b;
        for (std::size_t c = 0; c < fc.size(); ++c)
            for (const auto& m : fc[c]) {
                a.push_back(truth_seg[c]);
                b.push_back(m);
            }
        summary["sup_error"] = io::format_double(sup_error(a, b));
    }
    io::write_key_values(summary, ctx.out / "summary.ini");
    write_manifest(ctx, ctx.out);
}

void cmd_oracle(const RunContext& ctx) {
    const Experiment& e = ctx.exp;
    if (e.system != SystemKind::linear_gaussian) {
        throw ConfigError("system.kind", "analytic oracles exist only for linear_gaussian");
    }
    const auto& p = e.lg;
    fs::create_directories(ctx.out);

    const Eigen::Matrix2d S = lyapunov_equilibrium_cov(p);
    io::write_matrix_csv(S, ctx.out / "lyapunov.csv", {"x", "y"});

    std::vector<double> lags;
    for (int l = 0; l <= e.max_lag; ++l) lags.push_back(l * e.tau);
    const Vector acv = analytic_acv_linear(p, lags);
    Matrix a(acv.size(), 3);
    a << Eigen::Map<const Vector>(lags.data(), static_cast<Eigen::Index>(lags.size())), acv, acv / acv(0);
    io::write_matrix_csv(a, ctx.out / "acv.csv", {"lag", "acv", "acf"});

    const Vector omega = default_omega_grid(e.tau, e.omega_points);
    Matrix sp(omega.size(), 3);
    sp << omega, analytic_spectrum_full(p, omega), closure_spectrum_limit(p, omega);
    io::write_matrix_csv(sp, ctx.out / "spectrum.csv", {"omega", "full", "closure_limit"});

    Vector gxx, gxy;
    analytic_covariances(p, e.oracle_m, e.tau, gxx, gxy);
    const MemoryWeights w = memory_weights_from_covariances(gxx, gxy, e.tau);
    Matrix wm(w.S.size(), 2);
    for (Eigen::Index n = 0; n < w.S.size(); ++n) wm.row(n) << static_cast<double>(n) * e.tau, w.S(n);
    io::write_matrix_csv(wm, ctx.out / "memory_weights.csv", {"lag", "weight"});

    io::KeyValues kv;
    kv["averaged_coefficient"] = io::format_double(averaged_coefficient(p));
    kv["conditional_mean_slope"] = io::format_double(conditional_mean_slope(p));
    kv["convolution_residual"] = io::format_double(verify_convolution_identity(w, gxx, gxy));
    kv["memory_m"] = std::to_string(e.oracle_m);
    io::write_key_values(kv, ctx.out / "oracle.ini");
    write_manifest(ctx, ctx.out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-driven closures with memory: generate, train, predict, evaluate, oracle", "mdyn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "mdyn_out";
    int threads = 1;
    std::string data, model, truth, forecasts;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "overrides system.seed");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str()->check(
            CLI::NonNegativeNumber);
    };
    auto* gen = app.add_subcommand("generate", "simulate the configured reference system");
    auto* train = app.add_subcommand("train", "fit conditional expectation estimators");
    auto* pred = app.add_subcommand("predict", "run closure forecasts and ensembles");
    auto* eval = app.add_subcommand("evaluate", "statistics of forecasts against truth");
    auto* orc = app.add_subcommand("oracle", "analytic linear Gaussian oracles");
    for (auto* s : {gen, train, pred, eval, orc}) common(s);
    train->add_option("--data", data, "training dataset CSV (overrides paths.data)");
    pred->add_option("--data", data, "dataset holding the initial windows (overrides paths.data)");
    pred->add_option("--model", model, "model bundle directory (overrides paths.model)");
    eval->add_option("--truth", truth, "truth dataset CSV (overrides paths.truth)");
    eval->add_option("--forecasts", forecasts, "forecast directory (overrides paths.forecasts)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const Config cfg = Config::load(config_path);
        RunContext ctx;
        ctx.exp = read_experiment(cfg, seed);
        ctx.config_text = cfg.text();
        ctx.out = out_dir;
        ctx.threads = resolve_threads(threads);
        if (!data.empty()) ctx.exp.data = data;
        if (!model.empty()) ctx.exp.model = model;
        if (!truth.empty()) ctx.exp.truth = truth;
        if (!forecasts.empty()) ctx.exp.forecasts = forecasts;

        if (*gen) {
            ctx.command = "generate";
            cmd_generate(ctx);
        } else if (*train) {
            ctx.command = "train";
            cmd_train(ctx);
        } else if (*pred) {
            ctx.command = "predict";
            cmd_predict(ctx);
        } else if (*eval) {
            ctx.command = "evaluate";
            cmd_evaluate(ctx);
        } else {
            ctx.command = "oracle";
            cmd_oracle(ctx);
        }
        out << "mdyn " << ctx.command << ": wrote " << ctx.out.string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "mdyn: config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        err << "mdyn: usage error: " << e.what() << "\n";
        return 2;
    } catch (const DivergenceError& e) {
        err << "mdyn: divergence at step " << e.step() << ": " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        err << "mdyn: I/O error: " << e.what() << "\n";
        return 4;
    } catch (const fs::filesystem_error& e) {
        err << "mdyn: I/O error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "mdyn: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mdyn::cli
