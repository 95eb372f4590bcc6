#ifndef RENOIR_DISTRIBUTIONS_HPP
#define RENOIR_DISTRIBUTIONS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "json.hpp"
#include "renoir/common.hpp"

namespace renoir {

enum class NoiseFamily { Gaussian, Laplace };

// Non-decreasing bound omega with |f(x)-f(y)|_out <= omega(|x-y|_in).
// Only the two shapes the certificates need: a line through the origin
// and the identically-zero map.
class ContinuityModulus {
public:
    static ContinuityModulus linear(double slope, Norm input, Norm output);
    static ContinuityModulus zero(Norm input, Norm output);

    double operator()(double delta) const;
    bool is_zero() const { return slope_ == 0.0; }
    double slope() const { return slope_; }
    Norm input_norm() const { return input_; }
    Norm output_norm() const { return output_; }

private:
    ContinuityModulus(double slope, Norm input, Norm output)
        : slope_(slope), input_(input), output_(output) {}
    double slope_;
    Norm input_;
    Norm output_;
};

// Additive noise source: centered Gaussian with covariance Sigma (isotropic
// shortcut sigma^2*I supported) or coordinate-wise iid Laplace with scale b.
// Immutable after construction; sampling takes the seed explicitly.
class NoiseModel {
public:
    static NoiseModel gaussian_isotropic(int dim, double sigma);
    static NoiseModel gaussian(const Eigen::MatrixXd& covariance);
    static NoiseModel laplace(int dim, double b);

    static NoiseModel from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;

    NoiseFamily family() const { return family_; }
    int dim() const { return dim_; }

    // Gaussian only: smallest eigenvalue of Sigma.
    double sigma_min() const;
    const Eigen::MatrixXd& covariance() const;
    // Laplace only.
    double scale_b() const;

    // n independent rows, row i drawn from the stream (seed, kSample, i).
    Eigen::MatrixXd sample(int n, std::uint64_t seed) const;
    Eigen::VectorXd sample_one(std::uint64_t seed) const;

    double log_density(const Eigen::VectorXd& z) const;

    // Moduli of the carrier and sufficient-statistic terms; defined for the
    // Laplace family. Gaussian has a dedicated certificate and rejects these.
    ContinuityModulus carrier_modulus() const;
    ContinuityModulus statistic_modulus() const;

private:
    NoiseModel() = default;

    NoiseFamily family_ = NoiseFamily::Gaussian;
    int dim_ = 0;

    // Gaussian state.
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd chol_;      // lower Cholesky factor of cov_
    Eigen::MatrixXd cov_inv_;
    double log_det_ = 0.0;
    double sigma_min_ = 0.0;
    std::optional<double> iso_sigma_;  // set when built via the sigma^2*I shortcut

    // Laplace state.
    double b_ = 0.0;
};

}  // namespace renoir

#endif
