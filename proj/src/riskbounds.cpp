#include "renoir/riskbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "renoir/rng.hpp"

namespace renoir {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double misclass_probability(const RandomizedNet& net, const Eigen::VectorXd& x, int y, int n_mc,
                            std::uint64_t eval_seed) {
    if (!net.has_noise())
        return argmax_logits(net.forward_deterministic(x)) != y ? 1.0 : 0.0;
    int wrong = 0;
    for (int t = 0; t < n_mc; ++t)
        if (argmax_logits(net.forward_noisy(x, rng::derive(eval_seed, static_cast<std::uint64_t>(t)))) != y)
            ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(n_mc);
}

// Per-input attack seed; independent of the evaluation stream.
std::uint64_t attack_seed_for(const AttackSpec& attack, std::int64_t index) {
    return rng::derive(rng::derive(attack.seed, rng::kAttackInit), static_cast<std::uint64_t>(index));
}

std::uint64_t eval_seed_for(std::uint64_t seed, std::int64_t index) {
    return rng::derive(rng::derive(seed, rng::kEval), static_cast<std::uint64_t>(index));
}

// Renyi level guaranteed against perturbations inside the attack ball,
// with the ball radius carried into the noise's natural norm.
double certified_epsilon(const RandomizedNet& net, const AttackSpec& attack, double lambda) {
    if (!net.has_noise()) return attack.alpha == 0.0 ? 0.0 : kInf;
    const NoiseModel& noise = net.noise();
    const Norm noise_norm = noise.family() == NoiseFamily::Gaussian ? Norm::L2 : Norm::L1;
    Sensitivity delta;
    if (net.noise_layer_index() == 0) {
        delta.alpha = attack.alpha;
        delta.input_norm = attack.norm;
        delta.output_norm = noise_norm;
        delta.value = identity_ball_radius(attack.alpha, attack.norm, noise_norm, net.input_dim());
        delta.method = SensitivityMethod::ExactLinear;
    } else {
        const double input_radius =
            identity_ball_radius(attack.alpha, attack.norm, noise_norm, net.input_dim());
        delta = sensitivity_lipschitz(net.prefix_layers(), input_radius, noise_norm);
        delta.alpha = attack.alpha;
        delta.input_norm = attack.norm;
    }
    return certificate(noise, delta, lambda).epsilon;
}

}  // namespace

double empirical_risk(const RandomizedNet& net, const Dataset& data, int n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
    std::vector<double> probs(static_cast<std::size_t>(data.size()));
    parallel_for(data.size(), [&](std::int64_t i) {
        probs[static_cast<std::size_t>(i)] =
            misclass_probability(net, data.input(i), data.label(i), n_mc, eval_seed_for(seed, i));
    });
    return pairwise_mean(probs);
}

double empirical_adv_risk(const RandomizedNet& net, const Dataset& data, const AttackSpec& attack,
                          int n_mc, std::uint64_t seed) {
    if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
    std::vector<double> probs(static_cast<std::size_t>(data.size()));
    parallel_for(data.size(), [&](std::int64_t i) {
        AttackSpec per_input = attack;
        per_input.seed = attack_seed_for(attack, i);
        const AttackResult result = run_attack(net, data.input(i), data.label(i), per_input);
        probs[static_cast<std::size_t>(i)] =
            misclass_probability(net, result.x_adv, data.label(i), n_mc, eval_seed_for(seed, i));
    });
    return pairwise_mean(probs);
}

double exp_neg_entropy(const RandomizedNet& net, const Dataset& data, int n_mc, std::uint64_t seed,
                       EntropyKind kind) {
    if (n_mc < 100) throw std::invalid_argument("entropy estimation needs n_mc >= 100");
    std::vector<double> terms(static_cast<std::size_t>(data.size()));
    parallel_for(data.size(), [&](std::int64_t i) {
        const DiscreteDistribution law =
            net.predict_distribution(data.input(i), n_mc, eval_seed_for(seed, i));
        const double h = kind == EntropyKind::Shannon ? shannon_entropy(law) : collision_entropy(law);
        terms[static_cast<std::size_t>(i)] = std::exp(-h);
    });
    return pairwise_mean(terms);
}

double gap_bound_renyi(double epsilon, double exp_neg_shannon) {
    if (std::isnan(epsilon) || epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (exp_neg_shannon < 0.0 || exp_neg_shannon > 1.0)
        throw std::invalid_argument("entropy term must be in [0,1]");
    return 1.0 - std::exp(-epsilon) * exp_neg_shannon;
}

double gap_bound_tv(double epsilon_tv, double exp_neg_collision) {
    if (std::isnan(epsilon_tv) || epsilon_tv < 0.0 || epsilon_tv > 1.0)
        throw std::invalid_argument("epsilon_tv must be in [0,1]");
    if (exp_neg_collision < 0.0 || exp_neg_collision > 1.0)
        throw std::invalid_argument("entropy term must be in [0,1]");
    return std::clamp(1.0 - (exp_neg_collision - epsilon_tv), 0.0, 1.0);
}

nlohmann::json RiskReport::to_json() const {
    nlohmann::json j{{"natural_risk", natural_risk},
                     {"adversarial_risk", adversarial_risk},
                     {"alpha", alpha},
                     {"exp_neg_shannon", exp_neg_shannon},
                     {"exp_neg_collision", exp_neg_collision},
                     {"gap_bound_renyi", gap_bound_renyi},
                     {"gap_bound_tv", gap_bound_tv},
                     {"epsilon_tv", epsilon_tv},
                     {"mc_samples", mc_samples},
                     {"seed", seed},
                     {"attack", attack_spec}};
    j["epsilon"] = std::isinf(epsilon) ? nlohmann::json("inf") : nlohmann::json(epsilon);
    j["lambda"] = std::isinf(lambda) ? nlohmann::json("inf") : nlohmann::json(lambda);
    return j;
}

RiskReport risk_report(const RandomizedNet& net, const Dataset& data, const AttackSpec& attack,
                       double lambda, int n_mc, std::uint64_t seed) {
    RiskReport report;
    report.alpha = attack.alpha;
    report.lambda = lambda;
    report.mc_samples = n_mc;
    report.seed = seed;
    report.attack_spec = attack.to_json();
    report.natural_risk = empirical_risk(net, data, n_mc, seed);
    report.adversarial_risk = empirical_adv_risk(net, data, attack, n_mc, seed);
    report.exp_neg_shannon = exp_neg_entropy(net, data, std::max(100, n_mc), seed, EntropyKind::Shannon);
    report.exp_neg_collision =
        exp_neg_entropy(net, data, std::max(100, n_mc), seed, EntropyKind::Collision);
    report.epsilon = certified_epsilon(net, attack, lambda);
    report.epsilon_tv = renyi_to_tv(report.epsilon);
    report.gap_bound_renyi = renoir::gap_bound_renyi(report.epsilon, report.exp_neg_shannon);
    report.gap_bound_tv = renoir::gap_bound_tv(report.epsilon_tv, report.exp_neg_collision);
    return report;
}

std::vector<CurveRow> guaranteed_accuracy_curve(const RandomizedNet& net, const Dataset& data,
                                                const std::vector<double>& alpha_grid,
                                                double lambda, int n_mc, std::uint64_t seed,
                                                double prefix_scale) {
    if (alpha_grid.empty()) throw std::invalid_argument("alpha grid is empty");
    for (std::size_t i = 0; i + 1 < alpha_grid.size(); ++i)
        if (!(alpha_grid[i] < alpha_grid[i + 1]))
            throw std::invalid_argument("alpha grid must be strictly increasing");
    if (alpha_grid.front() < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (!(prefix_scale > 0.0)) throw std::invalid_argument("prefix scale must be positive");

    const double natural_accuracy = 1.0 - empirical_risk(net, data, n_mc, seed);
    const double term = net.has_noise()
                            ? exp_neg_entropy(net, data, std::max(100, n_mc), seed, EntropyKind::Shannon)
                            : 1.0;

    std::vector<CurveRow> rows;
    rows.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        double eps;
        if (!net.has_noise()) {
            eps = alpha == 0.0 ? 0.0 : kInf;
        } else {
            const NoiseModel& noise = net.noise();
            const Norm noise_norm = noise.family() == NoiseFamily::Gaussian ? Norm::L2 : Norm::L1;
            Sensitivity delta{alpha, noise_norm, noise_norm, prefix_scale * alpha,
                              SensitivityMethod::ExactLinear};
            eps = certificate(noise, delta, lambda).epsilon;
        }
        const double gap = gap_bound_renyi(eps, term);
        rows.push_back({alpha, eps, term, gap, std::max(0.0, natural_accuracy - gap)});
    }
    return rows;
}

std::string curve_to_csv(const std::vector<CurveRow>& rows) {
    std::ostringstream out;
    out << "alpha,epsilon,exp_neg_shannon,gap_bound,guaranteed_accuracy\n";
    for (const CurveRow& row : rows) {
        out << format_g9(row.alpha) << ',' << format_g9(row.epsilon) << ','
            << format_g9(row.exp_neg_shannon) << ',' << format_g9(row.gap_bound) << ','
            << format_g9(row.guaranteed_accuracy) << '\n';
    }
    return out.str();
}

nlohmann::json PredictionChangeReport::to_json() const {
    nlohmann::json j{{"alpha", alpha}, {"fraction", fraction}};
    j["epsilon"] = std::isinf(epsilon) ? nlohmann::json("inf") : nlohmann::json(epsilon);
    return j;
}

PredictionChangeReport prediction_change_fraction(const RandomizedNet& net, const Dataset& data,
                                                  const AttackSpec& attack, double epsilon,
                                                  int n_mc, std::uint64_t seed) {
    if (std::isnan(epsilon) || epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");

    std::vector<double> changed(static_cast<std::size_t>(data.size()));
    parallel_for(data.size(), [&](std::int64_t i) {
        AttackSpec per_input = attack;
        per_input.seed = attack_seed_for(attack, i);
        const AttackResult result = run_attack(net, data.input(i), data.label(i), per_input);
        // Shared draw stream for both laws: a zero perturbation compares
        // identical samples and never trips the threshold.
        const std::uint64_t shared = eval_seed_for(seed, i);
        const DiscreteDistribution base = net.predict_distribution(data.input(i), n_mc, shared);
        const DiscreteDistribution moved = net.predict_distribution(result.x_adv, n_mc, shared);
        const double div = renyi_discrete(moved, base, 1.0);
        changed[static_cast<std::size_t>(i)] = div > epsilon ? 1.0 : 0.0;
    });

    PredictionChangeReport report;
    report.alpha = attack.alpha;
    report.epsilon = epsilon;
    report.fraction = pairwise_mean(changed);
    return report;
}

}  // namespace renoir
