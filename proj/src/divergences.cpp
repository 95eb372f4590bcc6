#include "renoir/divergences.hpp"

#include <cmath>
#include <limits>

#include "renoir/rng.hpp"

namespace renoir {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("distribution needs at least one entry");
    double total = 0.0;
    for (double p : probs_) {
        if (p < 0.0) throw std::invalid_argument("distribution entry is negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("distribution entries must sum to 1 (got " + std::to_string(total) + ")");
}

DiscreteDistribution DiscreteDistribution::from_counts(const std::vector<std::int64_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("empty count vector");
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw std::invalid_argument("negative count");
        total += c;
    }
    if (total == 0) throw std::invalid_argument("counts sum to zero");
    std::vector<double> probs(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        probs[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return DiscreteDistribution(std::move(probs));
}

const char* metric_name(MetricKind m) {
    switch (m) {
        case MetricKind::Renyi: return "renyi";
        case MetricKind::KL: return "kl";
        case MetricKind::TV: return "tv";
        case MetricKind::Hellinger: return "hellinger";
        case MetricKind::Prokhorov: return "prokhorov";
        case MetricKind::Discrepancy: return "discrepancy";
        case MetricKind::Wasserstein: return "wasserstein";
        case MetricKind::Separation: return "separation";
    }
    return "?";
}

MetricKind metric_from_name(const std::string& name) {
    if (name == "renyi") return MetricKind::Renyi;
    if (name == "kl") return MetricKind::KL;
    if (name == "tv") return MetricKind::TV;
    if (name == "hellinger") return MetricKind::Hellinger;
    if (name == "prokhorov") return MetricKind::Prokhorov;
    if (name == "discrepancy") return MetricKind::Discrepancy;
    if (name == "wasserstein") return MetricKind::Wasserstein;
    if (name == "separation") return MetricKind::Separation;
    throw std::invalid_argument("unknown metric '" + name + "'");
}

double renyi_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q, double lambda) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution sizes differ");
    if (std::isnan(lambda) || lambda < 1.0) throw std::invalid_argument("order lambda must be >= 1");

    if (std::isinf(lambda)) {
        double sup = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0.0) continue;
            if (q[i] == 0.0) return kInf;
            sup = std::max(sup, p[i] / q[i]);
        }
        return std::log(sup);
    }
    if (lambda == 1.0) {
        // KL limit; terms with p_i == 0 drop out.
        double kl = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] == 0.0) continue;
            if (q[i] == 0.0) return kInf;
            kl += p[i] * std::log(p[i] / q[i]);
        }
        return std::max(0.0, kl);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return kInf;
        acc += std::exp(lambda * std::log(p[i]) + (1.0 - lambda) * std::log(q[i]));
    }
    return std::max(0.0, std::log(acc) / (lambda - 1.0));
}

double tv_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution sizes differ");
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) abs_sum += std::abs(p[i] - q[i]);
    return std::min(1.0, 0.5 * abs_sum);
}

double shannon_entropy(const DiscreteDistribution& p) {
    double h = 0.0;
    for (double pi : p.probs())
        if (pi > 0.0) h -= pi * std::log(pi);
    return std::max(0.0, h);
}

double collision_entropy(const DiscreteDistribution& p) {
    double s = 0.0;
    for (double pi : p.probs()) s += pi * pi;
    return std::max(0.0, -std::log(s));
}

double renyi_gaussian_shift(const Eigen::VectorXd& m1, const Eigen::VectorXd& m2,
                            const Eigen::MatrixXd& cov, double lambda) {
    if (m1.size() != m2.size() || cov.rows() != m1.size() || cov.cols() != m1.size())
        throw std::invalid_argument("mean/covariance dimensions differ");
    if (!(lambda >= 1.0)) throw std::invalid_argument("order lambda must be >= 1");
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success) throw NumericError("covariance is not positive definite");
    const Eigen::VectorXd delta = m1 - m2;
    return 0.5 * lambda * delta.dot(llt.solve(delta));
}

McEstimate renyi_mc(const NoiseModel& model, const Eigen::VectorXd& shift, double lambda,
                    std::int64_t n, std::uint64_t seed) {
    if (n < 1000) throw std::invalid_argument("renyi_mc needs at least 1000 samples");
    if (!(lambda >= 1.0) || std::isinf(lambda))
        throw std::invalid_argument("renyi_mc supports finite lambda >= 1");
    if (shift.size() != model.dim()) throw std::invalid_argument("shift dimension mismatch");

    // Draws z from the unshifted law; the estimand is
    //   1/(lambda-1) * log E_z[ (p(z)/p(z-shift))^(lambda-1) ],
    // which at lambda == 1 degenerates to E_z[ log p(z)/p(z-shift) ].
    const std::uint64_t base = rng::derive(seed, rng::kMc);
    std::vector<double> vals(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::int64_t i) {
        const Eigen::VectorXd z = model.sample_one(rng::derive(base, static_cast<std::uint64_t>(i)));
        const double log_ratio = model.log_density(z) - model.log_density(z - shift);
        vals[static_cast<std::size_t>(i)] =
            lambda == 1.0 ? log_ratio : std::exp((lambda - 1.0) * log_ratio);
    });

    const double mean = pairwise_mean(vals);
    double sq = 0.0;
    for (double v : vals) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / (static_cast<double>(n) - 1.0));
    const double se_mean = sd / std::sqrt(static_cast<double>(n));
    if (lambda == 1.0) return {mean, se_mean};
    if (!(mean > 0.0)) throw NumericError("renyi_mc: degenerate sample mean");
    return {std::log(mean) / (lambda - 1.0), se_mean / (mean * (lambda - 1.0))};
}

double renyi_to_tv(double eps) {
    if (std::isnan(eps) || eps < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    const double branch_kl = 1.5 * std::sqrt(std::sqrt(1.0 + 4.0 * eps / 9.0) - 1.0);
    const double branch_exp = std::tanh(0.5 * (eps + 1.0));
    return std::min(branch_kl, branch_exp);
}

LadderBounds renyi_to_ladder(double eps, bool lambda_is_inf, double diam) {
    if (std::isnan(eps) || eps < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (!(diam > 0.0)) throw std::invalid_argument("diameter must be positive");
    LadderBounds out{};
    out.hellinger = std::min(std::sqrt(eps), std::sqrt(2.0));
    const double tv = renyi_to_tv(eps);
    out.prokhorov = tv;
    out.discrepancy = tv;
    out.wasserstein = tv / diam;
    if (lambda_is_inf) out.separation = eps;
    return out;
}

}  // namespace renoir
