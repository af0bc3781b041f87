#pragma once

#include "mdyn/data_model.hpp"
#include "mdyn/linear_gaussian.hpp"
#include "mdyn/lorenz96.hpp"
#include "mdyn/tbh.hpp"

#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdyn::cli {

// Bad or missing configuration value; key is "section.name".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Missing command inputs.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    static Config load(const std::filesystem::path& path);
    static Config parse(const std::string& text, const std::string& source = "<config>");

    [[nodiscard]] const std::string& text() const noexcept { return text_; }
    [[nodiscard]] bool has(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] long get_int(const std::string& key) const;
    [[nodiscard]] long get_int(const std::string& key, long fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::vector<std::string> get_list(const std::string& key,
                                                    const std::vector<std::string>& fallback) const;
    [[nodiscard]] std::vector<long> get_int_list(const std::string& key, const std::vector<long>& fallback) const;

private:
    boost::property_tree::ptree tree_;
    std::string text_;
    std::string source_;
};

enum class SystemKind { linear_gaussian, l96, tbh };

struct Experiment {
    SystemKind system = SystemKind::linear_gaussian;
    std::uint64_t seed = 0;
    double T = 0.0;
    double tau = 0.01;
    double discard = 0.0;

    LinearGaussianParams lg;
    double lg_dt = 0.0;
    L96Params l96;
    double l96_dt = 0.001;
    TBHParams tbh;

    DelayConfig delay;
    bool hermite = true;
    int degree = 3;
    int cap = 3;
    std::optional<int> pod_modes;
    std::optional<double> pod_energy;
    double lambda = 0.0;
    long train_rows = 0;  // 0 = all

    int substeps = 1;
    bool residual_noise = false;

    long init_index = 0;
    long steps = 100;
    long members = 1;
    long cases = 1;
    long case_stride = 100;
    double perturbation_sd = 0.0;

    std::vector<std::string> stats;
    int max_lag = 100;
    int bins = 50;
    std::vector<long> leads;

    int oracle_m = 50;
    int omega_points = 1024;

    std::filesystem::path data;
    std::filesystem::path model;
    std::filesystem::path truth;
    std::filesystem::path forecasts;

    [[nodiscard]] int nx() const noexcept;
    [[nodiscard]] int ny() const noexcept;
    [[nodiscard]] std::string system_name() const;
};

// seed_override replaces system.seed when given.
Experiment read_experiment(const Config& cfg, std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace mdyn::cli
