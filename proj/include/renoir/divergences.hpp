#ifndef RENOIR_DIVERGENCES_HPP
#define RENOIR_DIVERGENCES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "renoir/distributions.hpp"

namespace renoir {

// Normalized probability vector over K class labels.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> probs);
    static DiscreteDistribution from_counts(const std::vector<std::int64_t>& counts);

    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const { return probs_; }

private:
    std::vector<double> probs_;
};

enum class MetricKind { Renyi, KL, TV, Hellinger, Prokhorov, Discrepancy, Wasserstein, Separation };

const char* metric_name(MetricKind m);
MetricKind metric_from_name(const std::string& name);

// Order-lambda divergence between discrete laws; lambda == 1 is the KL
// limit and lambda == infinity the max divergence. Returns +infinity when
// q vanishes somewhere p does not.
double renyi_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q, double lambda);

// Half L1 distance, in [0,1].
double tv_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q);

double shannon_entropy(const DiscreteDistribution& p);
double collision_entropy(const DiscreteDistribution& p);

// Exact order-lambda divergence between N(m1, cov) and N(m2, cov):
// (lambda/2) * (m1-m2)^T cov^{-1} (m1-m2).
double renyi_gaussian_shift(const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
                            const Eigen::MatrixXd& cov, double lambda);

struct McEstimate {
    double value;
    double std_error;
};

// Monte Carlo estimate of the order-lambda divergence between the noise law
// and its copy shifted by `shift`. Consistent as n grows; the reported
// standard error comes from the delta method on the sample mean.
McEstimate renyi_mc(const NoiseModel& model, const Eigen::VectorXd& shift, double lambda,
                    std::int64_t n, std::uint64_t seed);

// Total-variation level implied by an order-lambda level eps (any lambda >= 1):
// min( 1.5*sqrt(sqrt(1+4eps/9)-1), tanh((eps+1)/2) ).
double renyi_to_tv(double eps);

struct LadderBounds {
    double hellinger;
    double prokhorov;
    double discrepancy;
    double wasserstein;
    std::optional<double> separation;  // only when the source order is infinite
};

// Levels implied by a Renyi level eps across the weaker metrics. `diam` is
// the diameter of the output space under its metric (1 for labels with the
// trivial metric) and enters only the Wasserstein entry.
LadderBounds renyi_to_ladder(double eps, bool lambda_is_inf, double diam = 1.0);

}  // namespace renoir

#endif
