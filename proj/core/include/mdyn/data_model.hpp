#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace mdyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * Paired samples {x_i, y_i} observed at a fixed lag tau.
 *
 * Row i of x and y is the state at time t0 + i * tau. The object is
 * immutable once constructed and may be shared between threads.
 */
class TimeSeriesDataset {
public:
    TimeSeriesDataset(double tau, Matrix x, Matrix y, double t0 = 0.0);

    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] const Matrix& x() const noexcept { return x_; }
    [[nodiscard]] const Matrix& y() const noexcept { return y_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(x_.rows()); }
    [[nodiscard]] int nx() const noexcept { return static_cast<int>(x_.cols()); }
    [[nodiscard]] int ny() const noexcept { return static_cast<int>(y_.cols()); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * tau_; }

    /// Column subset, e.g. one L96 sector or the real parts of TBH modes.
    [[nodiscard]] TimeSeriesDataset select(const std::vector<int>& x_cols, const std::vector<int>& y_cols) const;

    /// Rows [first, first + count).
    [[nodiscard]] TimeSeriesDataset slice(std::size_t first, std::size_t count) const;

private:
    double tau_;
    double t0_;
    Matrix x_;
    Matrix y_;
};

/// Memory depths of the delay state z_t = (x_{t-m..t}, y_{t-n..t-1}).
struct DelayConfig {
    int m = 0;  ///< x memory, -1 means no x components
    int n = 0;  ///< y memory

    void validate() const;

    /// Number of leading samples consumed before the first complete window.
    [[nodiscard]] int depth() const noexcept { return m > n ? m : n; }
    [[nodiscard]] int state_dim(int nx, int ny) const noexcept { return (m + 1) * nx + n * ny; }
};

/// Regression problem: delay states Z (M x n_z) against targets G (M x n_g).
struct DesignMatrices {
    Matrix Z;
    Matrix G;
    std::vector<std::size_t> row_index;  ///< original sample index of each row
};

/// Targets are the y samples themselves.
DesignMatrices build_delay_states(const TimeSeriesDataset& ds, const DelayConfig& cfg);

/// Targets are user-supplied rows g(y_i), one per dataset sample.
DesignMatrices build_delay_states(const TimeSeriesDataset& ds, const DelayConfig& cfg, const Matrix& targets);

/**
 * Writes one delay state into `out` (length cfg.state_dim).
 *
 * `x_window` holds x_{t-m..t} (m+1 rows, oldest first) and `y_window`
 * holds y_{t-n..t-1} (n rows, oldest first).
 */
void assemble_delay_state(const Eigen::Ref<const Matrix>& x_window, const Eigen::Ref<const Matrix>& y_window,
                          Eigen::Ref<Vector> out);

/// CSV with header `t,x1..x{nx},y1..y{ny}`; also accepts the TBH layout
/// `t,u1_re,u1_im,u2_re,u2_im,F_re,F_im`.
TimeSeriesDataset read_csv(const std::filesystem::path& path);
void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path);
void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path,
               const std::vector<std::string>& column_names);

/// Column names used for TBH datasets (after `t`).
const std::vector<std::string>& tbh_column_names();

}  // namespace mdyn
