#include "mdyn/data_model.hpp"

#include "mdyn/errors.hpp"
#include "mdyn/matrix_io.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace mdyn {

TimeSeriesDataset::TimeSeriesDataset(double tau, Matrix x, Matrix y, double t0)
    : tau_(tau), t0_(t0), x_(std::move(x)), y_(std::move(y)) {
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw InvalidArgument("dataset: tau must be positive");
    if (x_.rows() < 1) throw InvalidArgument("dataset: at least one sample required");
    if (x_.cols() < 1 || y_.cols() < 1) throw InvalidArgument("dataset: n_x and n_y must be at least 1");
    if (x_.rows() != y_.rows()) {
        throw DimensionError("dataset: x has " + std::to_string(x_.rows()) + " rows but y has " +
                             std::to_string(y_.rows()));
    }
}

TimeSeriesDataset TimeSeriesDataset::select(const std::vector<int>& x_cols, const std::vector<int>& y_cols) const {
    Matrix xs(x_.rows(), static_cast<Eigen::Index>(x_cols.size()));
    Matrix ys(y_.rows(), static_cast<Eigen::Index>(y_cols.size()));
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
        if (x_cols[j] < 0 || x_cols[j] >= nx()) throw DimensionError("dataset: x column out of range");
        xs.col(static_cast<Eigen::Index>(j)) = x_.col(x_cols[j]);
    }
    for (std::size_t j = 0; j < y_cols.size(); ++j) {
        if (y_cols[j] < 0 || y_cols[j] >= ny()) throw DimensionError("dataset: y column out of range");
        ys.col(static_cast<Eigen::Index>(j)) = y_.col(y_cols[j]);
    }
    return TimeSeriesDataset(tau_, std::move(xs), std::move(ys), t0_);
}

TimeSeriesDataset TimeSeriesDataset::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > size()) throw LengthError("dataset: slice out of range");
    const auto f = static_cast<Eigen::Index>(first);
    const auto c = static_cast<Eigen::Index>(count);
    return TimeSeriesDataset(tau_, x_.middleRows(f, c), y_.middleRows(f, c), time(first));
}

void DelayConfig::validate() const {
    if (m < -1) throw InvalidArgument("delay: m must be >= -1");
    if (n < 0) throw InvalidArgument("delay: n must be >= 0");
    if (m == -1 && n == 0) throw InvalidArgument("delay: empty delay state (m = -1 and n = 0)");
}

void assemble_delay_state(const Eigen::Ref<const Matrix>& x_window, const Eigen::Ref<const Matrix>& y_window,
                          Eigen::Ref<Vector> out) {
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < x_window.rows(); ++r)
        for (Eigen::Index c = 0; c < x_window.cols(); ++c) out(k++) = x_window(r, c);
    for (Eigen::Index r = 0; r < y_window.rows(); ++r)
        for (Eigen::Index c = 0; c < y_window.cols(); ++c) out(k++) = y_window(r, c);
}

DesignMatrices build_delay_states(const TimeSeriesDataset& ds, const DelayConfig& cfg) {
    return build_delay_states(ds, cfg, ds.y());
}

DesignMatrices build_delay_states(const TimeSeriesDataset& ds, const DelayConfig& cfg, const Matrix& targets) {
    cfg.validate();
    const auto N = static_cast<Eigen::Index>(ds.size());
    const Eigen::Index depth = cfg.depth();
    if (N <= depth) {
        throw LengthError("delay states: dataset of " + std::to_string(N) + " samples is too short for memory " +
                          std::to_string(depth));
    }
    if (targets.rows() != N) throw DimensionError("delay states: target rows must align with dataset samples");

    const Eigen::Index M = N - depth;
    const Eigen::Index nz = cfg.state_dim(ds.nx(), ds.ny());
    DesignMatrices dm;
    dm.Z.resize(M, nz);
    dm.G = targets.bottomRows(M);
    dm.row_index.resize(static_cast<std::size_t>(M));

    const Eigen::Index xlen = cfg.m + 1;
    for (Eigen::Index j = 0; j < M; ++j) {
        const Eigen::Index i = j + depth;
        dm.row_index[static_cast<std::size_t>(j)] = static_cast<std::size_t>(i);
        Eigen::Index k = 0;
        for (Eigen::Index r = i - cfg.m; r <= i && xlen > 0; ++r)
            for (Eigen::Index c = 0; c < ds.x().cols(); ++c) dm.Z(j, k++) = ds.x()(r, c);
        for (Eigen::Index r = i - cfg.n; r < i; ++r)
            for (Eigen::Index c = 0; c < ds.y().cols(); ++c) dm.Z(j, k++) = ds.y()(r, c);
    }
    return dm;
}

const std::vector<std::string>& tbh_column_names() {
    static const std::vector<std::string> names{"u1_re", "u1_im", "u2_re", "u2_im", "F_re", "F_im"};
    return names;
}

namespace {

std::vector<std::string> default_names(const TimeSeriesDataset& ds) {
    std::vector<std::string> names;
    for (int j = 1; j <= ds.nx(); ++j) names.push_back("x" + std::to_string(j));
    for (int j = 1; j <= ds.ny(); ++j) names.push_back("y" + std::to_string(j));
    return names;
}

// Returns n_x for a recognised header, throws otherwise.
int classify_header(const std::vector<std::string>& header, const std::string& file) {
    if (header.empty() || header[0] != "t") throw IoError(file + ": header must start with column 't'");
    const std::vector<std::string> rest(header.begin() + 1, header.end());
    if (rest == tbh_column_names()) return 2;
    int nx = 0;
    std::size_t j = 0;
    for (; j < rest.size() && rest[j] == "x" + std::to_string(nx + 1); ++j) ++nx;
    int ny = 0;
    for (; j < rest.size() && rest[j] == "y" + std::to_string(ny + 1); ++j) ++ny;
    if (j != rest.size() || nx == 0 || ny == 0) {
        throw IoError(file + ": missing or malformed header, expected t,x1..xN,y1..yM");
    }
    return nx;
}

}  // namespace

TimeSeriesDataset read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    const std::string file = path.string();
    std::string line;
    if (!std::getline(in, line)) throw IoError(file + ": missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header;
    for (auto f : io::split(line)) header.emplace_back(f);
    const int nx = classify_header(header, file);
    const auto ncols = header.size();

    std::vector<double> t;
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = io::split(line);
        const std::string ctx = file + ":" + std::to_string(lineno);
        if (fields.size() != ncols) {
            throw IoError(ctx + ": malformed row, expected " + std::to_string(ncols) + " fields, found " +
                          std::to_string(fields.size()));
        }
        t.push_back(io::parse_double(fields[0], ctx));
        for (std::size_t j = 1; j < ncols; ++j) values.push_back(io::parse_double(fields[j], ctx));
    }
    if (t.size() < 2) throw IoError(file + ": at least two rows are needed to infer tau");

    const double tau = t[1] - t[0];
    if (!(tau > 0.0)) throw IoError(file + ": timestamps must be increasing");
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - tau) > 1e-9 * tau) {
            throw IoError(file + ": non-uniform timestamps at row " + std::to_string(i + 1));
        }
    }

    const auto N = static_cast<Eigen::Index>(t.size());
    const auto width = static_cast<Eigen::Index>(ncols - 1);
    Matrix x(N, nx);
    Matrix y(N, width - nx);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < width; ++j) {
            const double v = values[static_cast<std::size_t>(i * width + j)];
            if (j < nx) x(i, j) = v; else y(i, j - nx) = v;
        }
    }
    return TimeSeriesDataset(tau, std::move(x), std::move(y), t[0]);
}

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
    write_csv(ds, path, default_names(ds));
}

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path,
               const std::vector<std::string>& column_names) {
    if (static_cast<int>(column_names.size()) != ds.nx() + ds.ny()) {
        throw DimensionError("write_csv: column name count does not match dataset width");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << 't';
    for (const auto& n : column_names) out << ',' << n;
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out << io::format_double(ds.time(i));
        for (Eigen::Index j = 0; j < ds.nx(); ++j) out << ',' << io::format_double(ds.x()(r, j));
        for (Eigen::Index j = 0; j < ds.ny(); ++j) out << ',' << io::format_double(ds.y()(r, j));
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace mdyn
