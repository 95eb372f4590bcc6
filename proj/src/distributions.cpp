#include "renoir/distributions.hpp"

#include <cmath>

#include "renoir/rng.hpp"

namespace renoir {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kDegenerateEig = 1e-12;
}  // namespace

ContinuityModulus ContinuityModulus::linear(double slope, Norm input, Norm output) {
    if (!(slope > 0.0)) throw std::invalid_argument("modulus slope must be positive");
    return {slope, input, output};
}

ContinuityModulus ContinuityModulus::zero(Norm input, Norm output) {
    return {0.0, input, output};
}

double ContinuityModulus::operator()(double delta) const {
    if (delta < 0.0) throw std::invalid_argument("modulus argument must be non-negative");
    return slope_ * delta;
}

NoiseModel NoiseModel::gaussian_isotropic(int dim, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
    NoiseModel m = gaussian(sigma * sigma * Eigen::MatrixXd::Identity(dim, dim));
    m.iso_sigma_ = sigma;
    return m;
}

NoiseModel NoiseModel::gaussian(const Eigen::MatrixXd& covariance) {
    if (covariance.rows() < 1 || covariance.rows() != covariance.cols())
        throw std::invalid_argument("covariance must be square with dimension >= 1");
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("covariance must be symmetric");

    NoiseModel m;
    m.family_ = NoiseFamily::Gaussian;
    m.dim_ = static_cast<int>(covariance.rows());
    m.cov_ = 0.5 * (covariance + covariance.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.cov_);
    if (eig.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
    m.sigma_min_ = eig.eigenvalues().minCoeff();
    if (m.sigma_min_ <= kDegenerateEig)
        throw std::invalid_argument("covariance is degenerate (eigenvalue <= 1e-12)");

    Eigen::LLT<Eigen::MatrixXd> llt(m.cov_);
    if (llt.info() != Eigen::Success) throw NumericError("covariance Cholesky failed");
    m.chol_ = llt.matrixL();
    m.cov_inv_ = llt.solve(Eigen::MatrixXd::Identity(m.dim_, m.dim_));
    m.log_det_ = 2.0 * m.chol_.diagonal().array().log().sum();
    return m;
}

NoiseModel NoiseModel::laplace(int dim, double b) {
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(b > 0.0)) throw std::invalid_argument("laplace scale b must be positive");
    NoiseModel m;
    m.family_ = NoiseFamily::Laplace;
    m.dim_ = dim;
    m.b_ = b;
    return m;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& spec) {
    if (!spec.is_object()) throw std::invalid_argument("noise spec must be a JSON object");
    const std::string family = spec.at("family").get<std::string>();
    if (family == "gaussian") {
        if (spec.contains("cov")) {
            const auto rows = spec.at("cov").get<std::vector<std::vector<double>>>();
            const int d = static_cast<int>(rows.size());
            Eigen::MatrixXd cov(d, d);
            for (int i = 0; i < d; ++i) {
                if (static_cast<int>(rows[i].size()) != d)
                    throw std::invalid_argument("noise spec field 'cov' must be square");
                for (int j = 0; j < d; ++j) cov(i, j) = rows[i][j];
            }
            return gaussian(cov);
        }
        return gaussian_isotropic(spec.at("dim").get<int>(), spec.at("sigma").get<double>());
    }
    if (family == "laplace")
        return laplace(spec.at("dim").get<int>(), spec.at("b").get<double>());
    throw std::invalid_argument("unknown noise family '" + family + "'");
}

nlohmann::json NoiseModel::to_json() const {
    nlohmann::json j;
    if (family_ == NoiseFamily::Laplace) {
        j["family"] = "laplace";
        j["b"] = b_;
        j["dim"] = dim_;
        return j;
    }
    j["family"] = "gaussian";
    if (iso_sigma_) {
        j["sigma"] = *iso_sigma_;
        j["dim"] = dim_;
    } else {
        std::vector<std::vector<double>> rows(dim_, std::vector<double>(dim_));
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < dim_; ++k) rows[i][k] = cov_(i, k);
        j["cov"] = rows;
    }
    return j;
}

double NoiseModel::sigma_min() const {
    if (family_ != NoiseFamily::Gaussian)
        throw std::invalid_argument("sigma_min is defined for the Gaussian family");
    return sigma_min_;
}

const Eigen::MatrixXd& NoiseModel::covariance() const {
    if (family_ != NoiseFamily::Gaussian)
        throw std::invalid_argument("covariance is defined for the Gaussian family");
    return cov_;
}

double NoiseModel::scale_b() const {
    if (family_ != NoiseFamily::Laplace)
        throw std::invalid_argument("scale_b is defined for the Laplace family");
    return b_;
}

Eigen::MatrixXd NoiseModel::sample(int n, std::uint64_t seed) const {
    if (n < 1) throw std::invalid_argument("sample count must be >= 1");
    const std::uint64_t base = rng::derive(seed, rng::kSample);
    Eigen::MatrixXd out(n, dim_);
    for (int i = 0; i < n; ++i) {
        rng::Stream stream(base, static_cast<std::uint64_t>(i));
        if (family_ == NoiseFamily::Laplace) {
            for (int j = 0; j < dim_; ++j) out(i, j) = b_ * stream.next_laplace();
        } else {
            Eigen::VectorXd z(dim_);
            for (int j = 0; j < dim_; ++j) z(j) = stream.next_gauss();
            if (iso_sigma_)
                out.row(i) = (*iso_sigma_ * z).transpose();
            else
                out.row(i) = (chol_ * z).transpose();
        }
    }
    return out;
}

Eigen::VectorXd NoiseModel::sample_one(std::uint64_t seed) const {
    return sample(1, seed).row(0).transpose();
}

double NoiseModel::log_density(const Eigen::VectorXd& z) const {
    if (z.size() != dim_)
        throw std::invalid_argument("log_density: vector dimension mismatch");
    if (family_ == NoiseFamily::Laplace)
        return -static_cast<double>(dim_) * std::log(2.0 * b_) - z.lpNorm<1>() / b_;
    const double quad = z.dot(cov_inv_ * z);
    return -0.5 * (dim_ * kLog2Pi + log_det_ + quad);
}

ContinuityModulus NoiseModel::carrier_modulus() const {
    if (family_ != NoiseFamily::Laplace)
        throw std::invalid_argument("moduli are defined for the Laplace family; use the Gaussian certificate path");
    return ContinuityModulus::linear(1.0 / b_, Norm::L1, Norm::L1);
}

ContinuityModulus NoiseModel::statistic_modulus() const {
    if (family_ != NoiseFamily::Laplace)
        throw std::invalid_argument("moduli are defined for the Laplace family; use the Gaussian certificate path");
    return ContinuityModulus::zero(Norm::L1, Norm::L2);
}

}  // namespace renoir
