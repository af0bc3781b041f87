#pragma once

#include "mdyn/data_model.hpp"
#include "mdyn/random.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mdyn {

/// A sampled curve: lag, time, wavenumber or bin centre against a value.
struct CurveResult {
    Vector abscissa;
    Vector values;
    Vector stderr_values;  ///< empty when not estimated

    void write_csv(const std::filesystem::path& path, const std::string& x_name, const std::string& y_name) const;
};

/// Mean-subtracted temporal autocovariance at lags 0..max_lag; abscissa in units of `tau`.
CurveResult acf(const Eigen::Ref<const Vector>& series, int max_lag, bool normalize, double tau = 1.0);

/// Normalized ACF of each column, then averaged; stderr is the spread across columns / sqrt(cols).
CurveResult acf_columns(const Eigen::Ref<const Matrix>& series, int max_lag, double tau = 1.0);

/// <a_{t+l} b_t> / <a_t a_t> with means removed.
CurveResult ccf(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, int max_lag, double tau = 1.0);

struct PdfEstimate {
    CurveResult histogram;  ///< density at bin centres, integrates to one
    CurveResult kde;        ///< Gaussian kernel density at the same centres
    double bin_width = 0.0;
    double bandwidth = 0.0;
};

/// Histogram density on [lo, hi] (defaults to the sample range) plus a KDE.
/// A non-positive bandwidth selects Silverman's rule.
PdfEstimate pdf_estimate(const Eigen::Ref<const Vector>& series, int n_bins, double lo, double hi,
                         double bandwidth = 0.0);
PdfEstimate pdf_estimate(const Eigen::Ref<const Vector>& series, int n_bins);

double silverman_bandwidth(const Eigen::Ref<const Vector>& series);

/// L1 distance between histogram densities of two samples on shared bins over [lo, hi].
double histogram_l1_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, int n_bins,
                             double lo, double hi);

struct WaveStatistics {
    Vector wavenumber;      ///< 0..K/2
    Vector mean_amplitude;  ///< <|u^m|>
    Vector variance;        ///< <|u^m - <u^m>|^2>
};

/// Unnormalized forward DFT over the K columns at each time (rows of `X` are times).
WaveStatistics wave_statistics(const Eigen::Ref<const Matrix>& X);

/// Unnormalized forward DFT of one spatial snapshot.
Eigen::VectorXcd spatial_dft(const Eigen::Ref<const Vector>& row);

struct SkillCurves {
    CurveResult rmse;
    CurveResult ancr;
};

/**
 * truth[c] is a steps x K path; forecasts[c][e] are member paths of the same shape.
 * RMSE pools squared errors over cases, members and components. ANCR pools
 * anomaly products (relative to `climatology`) the same way; a vanishing
 * anomaly variance gives 0.
 */
SkillCurves rmse_ancr(const std::vector<Matrix>& truth, const std::vector<std::vector<Matrix>>& forecasts,
                      const Vector& climatology, double tau);

/// Rank 0..n of `truth` among `ensemble`; ties are broken uniformly at random.
int truth_rank(double truth, const std::vector<double>& ensemble, Rng& rng);

/// Tallies one rank per case, component and stored lead in `leads`.
std::vector<long> rank_histogram(const std::vector<Matrix>& truth, const std::vector<std::vector<Matrix>>& ensemble,
                                 const std::vector<int>& leads, Rng& rng);

struct ChiSquareResult {
    double statistic;
    int dof;
    double p_value;
};

/// Pearson chi-square against a uniform histogram.
ChiSquareResult chi_square_flatness(const std::vector<long>& counts);

/// Mean over realizations of max_t |x(t) - x_hat(t)|^2 (Euclidean norm per row).
double sup_error(const std::vector<Matrix>& full_paths, const std::vector<Matrix>& closure_paths);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mdyn
