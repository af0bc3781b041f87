#include "mdyn/basis.hpp"

#include "mdyn/errors.hpp"
#include "mdyn/matrix_io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mdyn {

void normalized_hermite_values(double u, int max_degree, double* out) {
    out[0] = 1.0;
    if (max_degree == 0) return;
    out[1] = u;
    for (int k = 1; k < max_degree; ++k) {
        out[k + 1] = (u * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) / std::sqrt(k + 1.0);
    }
}

namespace {

void compositions(int dim, int remaining, int cap, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    const auto pos = static_cast<int>(cur.size());
    if (pos == dim - 1) {
        if (remaining <= cap) {
            cur.push_back(remaining);
            out.push_back(cur);
            cur.pop_back();
        }
        return;
    }
    for (int v = std::min(remaining, cap); v >= 0; --v) {
        cur.push_back(v);
        compositions(dim, remaining - v, cap, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<std::vector<int>> total_degree_indices(int dim, int d, int cap) {
    if (dim < 1) throw InvalidArgument("hermite: input dimension must be >= 1");
    if (d < 0 || cap < 0) throw InvalidArgument("hermite: degrees must be non-negative");
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    for (int deg = 0; deg <= d; ++deg) compositions(dim, deg, cap, cur, out);
    return out;
}

HermiteBasis::HermiteBasis(Vector mean, Matrix whitening, std::vector<std::vector<int>> multi_indices)
    : mean_(std::move(mean)), whitening_(std::move(whitening)), indices_(std::move(multi_indices)) {
    const auto dim = mean_.size();
    if (whitening_.rows() != dim || whitening_.cols() != dim) throw DimensionError("hermite: whitening shape");
    if (indices_.empty()) throw InvalidArgument("hermite: empty multi-index set");
    cap_.assign(static_cast<std::size_t>(dim), 0);
    for (const auto& a : indices_) {
        if (static_cast<Eigen::Index>(a.size()) != dim) throw DimensionError("hermite: multi-index length");
        for (Eigen::Index j = 0; j < dim; ++j) cap_[j] = std::max(cap_[j], a[j]);
    }
    if (std::any_of(indices_.front().begin(), indices_.front().end(), [](int v) { return v != 0; })) {
        throw InvalidArgument("hermite: the constant multi-index must come first");
    }
}

Vector HermiteBasis::evaluate(const Eigen::Ref<const Vector>& z) const {
    Matrix out(1, size());
    evaluate_rows(z.transpose(), out);
    return out.row(0).transpose();
}

void HermiteBasis::evaluate_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const {
    const auto dim = static_cast<Eigen::Index>(mean_.size());
    if (Z.cols() != dim) throw DimensionError("hermite: input has dimension " + std::to_string(Z.cols()) +
                                              ", basis expects " + std::to_string(dim));
    const int maxcap = *std::max_element(cap_.begin(), cap_.end());
    std::vector<double> table(static_cast<std::size_t>(dim * (maxcap + 1)));
    Vector u(dim);
    for (Eigen::Index r = 0; r < Z.rows(); ++r) {
        if (!Z.row(r).allFinite()) throw NonFiniteError("hermite: non-finite input");
        u.noalias() = whitening_ * (Z.row(r).transpose() - mean_);
        for (Eigen::Index j = 0; j < dim; ++j) {
            normalized_hermite_values(u(j), cap_[j], table.data() + j * (maxcap + 1));
        }
        for (std::size_t l = 0; l < indices_.size(); ++l) {
            double v = 1.0;
            const auto& a = indices_[l];
            for (Eigen::Index j = 0; j < dim; ++j) v *= table[j * (maxcap + 1) + a[j]];
            out(r, static_cast<Eigen::Index>(l)) = v;
        }
    }
}

HermiteBasis fit_hermite(const Eigen::Ref<const Matrix>& Z, int max_total_degree, int per_dim_cap) {
    if (Z.rows() < 2) throw LengthError("hermite: at least two samples are required");
    if (!Z.allFinite()) throw NonFiniteError("hermite: non-finite training data");
    const Vector mu = Z.colwise().mean();
    const Matrix Zc = Z.rowwise() - mu.transpose();
    const Matrix cov = (Zc.transpose() * Zc) / static_cast<double>(Z.rows());

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw ConditioningError("hermite: covariance eigendecomposition failed");
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmax > 0.0) || !std::isfinite(lmax)) {
        throw ConditioningError("hermite: empirical covariance is numerically zero; cannot whiten");
    }
    const double floor = 1e-10 * lmax;
    const Vector inv_sqrt = eig.eigenvalues().unaryExpr([floor](double l) { return 1.0 / std::sqrt(std::max(l, floor)); });
    Matrix W = eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    return HermiteBasis(mu, std::move(W), total_degree_indices(static_cast<int>(Z.cols()), max_total_degree, per_dim_cap));
}

PODBasis::PODBasis(Vector z_bar, Matrix V, Vector sigma, std::size_t n_train)
    : z_bar_(std::move(z_bar)), V_(std::move(V)), sigma_(std::move(sigma)), n_train_(n_train) {
    if (V_.rows() != z_bar_.size() || V_.cols() != sigma_.size()) throw DimensionError("pod: inconsistent shapes");
    if (sigma_.size() < 1) throw InvalidArgument("pod: at least one mode is required");
    for (Eigen::Index i = 0; i < sigma_.size(); ++i) {
        if (!(sigma_(i) > 0.0)) throw RankError("pod: singular values must be positive");
        if (i > 0 && sigma_(i) > sigma_(i - 1)) throw InvalidArgument("pod: singular values must be non-increasing");
    }
    proj_ = V_ * sigma_.cwiseInverse().asDiagonal();
}

Vector PODBasis::evaluate(const Eigen::Ref<const Vector>& z) const {
    if (z.size() != z_bar_.size()) {
        throw DimensionError("pod: input has dimension " + std::to_string(z.size()) + ", basis expects " +
                             std::to_string(z_bar_.size()));
    }
    return proj_.transpose() * (z - z_bar_);
}

void PODBasis::evaluate_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const {
    if (Z.cols() != z_bar_.size()) throw DimensionError("pod: input dimension mismatch");
    out.noalias() = (Z.rowwise() - z_bar_.transpose()) * proj_;
}

PODBasis fit_pod(const Eigen::Ref<const Matrix>& Z, const ModeSelection& selection) {
    const Eigen::Index M = Z.rows();
    const Eigen::Index nz = Z.cols();
    if (M < 2) throw LengthError("pod: at least two samples are required");
    if (!Z.allFinite()) throw NonFiniteError("pod: non-finite training data");
    const Vector z_bar = Z.colwise().mean();

    Vector sigma;
    Matrix V;
    {
        Matrix Zc = Z.rowwise() - z_bar.transpose();
        if (M >= nz) {
            // Thin route: Zc = Q R, then R = U_R S V^T shares S and V with Zc.
            Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(Zc);
            Matrix R = qr.matrixQR().topRows(nz).triangularView<Eigen::Upper>();
            Eigen::BDCSVD<Matrix> svd(R, Eigen::ComputeFullV);
            sigma = svd.singularValues();
            V = svd.matrixV();
        } else {
            Eigen::BDCSVD<Matrix> svd(Zc, Eigen::ComputeThinV);
            sigma = svd.singularValues();
            V = svd.matrixV();
        }
    }
    if (!(sigma.size() > 0 && sigma(0) > 0.0)) throw RankError("pod: centered data matrix is zero");

    const double threshold = 1e-12 * sigma(0);
    Eigen::Index L = 0;
    if (const auto* c = std::get_if<ModeCount>(&selection)) {
        if (c->count < 1) throw InvalidArgument("pod: mode count must be >= 1");
        L = c->count;
        if (L > sigma.size() || sigma(L - 1) < threshold) {
            throw RankError("pod: requested " + std::to_string(L) + " modes but the centered data has numerical rank " +
                            std::to_string((sigma.array() >= threshold).count()));
        }
    } else {
        const double frac = std::get<EnergyFraction>(selection).fraction;
        if (!(frac > 0.0 && frac <= 1.0)) throw InvalidArgument("pod: energy fraction must lie in (0, 1]");
        const double total = sigma.squaredNorm();
        double acc = 0.0;
        while (L < sigma.size() && sigma(L) >= threshold) {
            acc += sigma(L) * sigma(L);
            ++L;
            if (acc >= frac * total * (1.0 - 1e-15)) break;
        }
    }

    Matrix VL = V.leftCols(L);
    for (Eigen::Index j = 0; j < L; ++j) {
        Eigen::Index imax = 0;
        VL.col(j).cwiseAbs().maxCoeff(&imax);
        if (VL(imax, j) < 0.0) VL.col(j) = -VL.col(j);
    }
    return PODBasis(z_bar, std::move(VL), sigma.head(L), static_cast<std::size_t>(M));
}

int Basis::size() const noexcept {
    return std::visit(
        [](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PODBasis>) return b.size() + 1;
            else return b.size();
        },
        impl_);
}

int Basis::input_dim() const noexcept {
    return std::visit([](const auto& b) { return b.input_dim(); }, impl_);
}

Vector Basis::features(const Eigen::Ref<const Vector>& z) const {
    Matrix out(1, size());
    features_rows(z.transpose(), out);
    return out.row(0).transpose();
}

void Basis::features_rows(const Eigen::Ref<const Matrix>& Z, Eigen::Ref<Matrix> out) const {
    if (out.rows() != Z.rows() || out.cols() != size()) throw DimensionError("basis: output block shape");
    if (kind() == Kind::hermite) {
        hermite().evaluate_rows(Z, out);
        return;
    }
    const auto& p = pod();
    if (!Z.allFinite()) throw NonFiniteError("pod: non-finite input");
    out.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(p.n_train())));
    p.evaluate_rows(Z, out.rightCols(p.size()));
}

void save_basis(const Basis& basis, const std::filesystem::path& dir, const std::string& prefix) {
    io::KeyValues kv;
    kv["format_version"] = "1";
    if (basis.kind() == Basis::Kind::hermite) {
        const auto& h = basis.hermite();
        kv["kind"] = "hermite";
        kv["input_dim"] = std::to_string(h.input_dim());
        kv["features"] = std::to_string(h.size());
        io::write_matrix_csv(h.mean().transpose(), dir / (prefix + "hermite_mean.csv"));
        io::write_matrix_csv(h.whitening(), dir / (prefix + "hermite_whitening.csv"));
        Matrix idx(h.size(), h.input_dim());
        for (int l = 0; l < h.size(); ++l)
            for (int j = 0; j < h.input_dim(); ++j) idx(l, j) = h.multi_indices()[l][j];
        io::write_matrix_csv(idx, dir / (prefix + "hermite_indices.csv"));
    } else {
        const auto& p = basis.pod();
        kv["kind"] = "pod";
        kv["input_dim"] = std::to_string(p.input_dim());
        kv["modes"] = std::to_string(p.size());
        kv["n_train"] = std::to_string(p.n_train());
        io::write_matrix_csv(p.mean().transpose(), dir / (prefix + "pod_mean.csv"));
        io::write_matrix_csv(p.modes(), dir / (prefix + "pod_modes.csv"));
        io::write_matrix_csv(p.singular_values().transpose(), dir / (prefix + "pod_sigma.csv"));
    }
    io::write_key_values(kv, dir / (prefix + "basis.meta"));
}

Basis load_basis(const std::filesystem::path& dir, const std::string& prefix) {
    const auto meta_path = dir / (prefix + "basis.meta");
    const auto kv = io::read_key_values(meta_path);
    if (io::require_key(kv, "format_version", meta_path) != "1") {
        throw IoError(meta_path.string() + ": unsupported basis format version");
    }
    const auto& kind = io::require_key(kv, "kind", meta_path);
    if (kind == "hermite") {
        Vector mu = io::read_matrix_csv(dir / (prefix + "hermite_mean.csv")).row(0).transpose();
        Matrix W = io::read_matrix_csv(dir / (prefix + "hermite_whitening.csv"));
        const Matrix idx = io::read_matrix_csv(dir / (prefix + "hermite_indices.csv"));
        std::vector<std::vector<int>> indices(static_cast<std::size_t>(idx.rows()));
        for (Eigen::Index l = 0; l < idx.rows(); ++l)
            for (Eigen::Index j = 0; j < idx.cols(); ++j) indices[l].push_back(static_cast<int>(idx(l, j)));
        return Basis(HermiteBasis(std::move(mu), std::move(W), std::move(indices)));
    }
    if (kind == "pod") {
        Vector mu = io::read_matrix_csv(dir / (prefix + "pod_mean.csv")).row(0).transpose();
        Matrix V = io::read_matrix_csv(dir / (prefix + "pod_modes.csv"));
        Vector s = io::read_matrix_csv(dir / (prefix + "pod_sigma.csv")).row(0).transpose();
        const auto n = std::stoull(io::require_key(kv, "n_train", meta_path));
        return Basis(PODBasis(std::move(mu), std::move(V), std::move(s), n));
    }
    throw IoError(meta_path.string() + ": unknown basis kind '" + kind + "'");
}

}  // namespace mdyn
