#ifndef RENOIR_RISKBOUNDS_HPP
#define RENOIR_RISKBOUNDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "renoir/attacks.hpp"
#include "renoir/certify.hpp"
#include "renoir/net.hpp"

namespace renoir {

// Mean over the dataset of the sampled misclassification probability,
// n_mc draws per input from the stream (seed, kEval, index).
double empirical_risk(const RandomizedNet& net, const Dataset& data, int n_mc, std::uint64_t seed);

// Same estimate at attack-proposed inputs. Per-input attack seeds derive
// from the spec's seed, the evaluation stream matches empirical_risk, so a
// zero-budget attack reproduces the natural risk bit for bit.
double empirical_adv_risk(const RandomizedNet& net, const Dataset& data, const AttackSpec& attack,
                          int n_mc, std::uint64_t seed);

enum class EntropyKind { Shannon, Collision };

// Mean over inputs of exp(-H(label law)) with the plug-in entropy of n_mc
// sampled labels.
double exp_neg_entropy(const RandomizedNet& net, const Dataset& data, int n_mc, std::uint64_t seed,
                       EntropyKind kind);

// Gap permitted between adversarial and natural risk at a Renyi level eps:
// 1 - exp(-eps) * E_x[exp(-H)].
double gap_bound_renyi(double epsilon, double exp_neg_shannon);

// Total-variation variant via the collision entropy, clamped to [0,1]:
// 1 - (E_x[exp(-H_c)] - eps_tv).
double gap_bound_tv(double epsilon_tv, double exp_neg_collision);

struct RiskReport {
    double natural_risk = 0.0;
    double adversarial_risk = 0.0;
    double alpha = 0.0;
    double exp_neg_shannon = 0.0;
    double exp_neg_collision = 0.0;
    double gap_bound_renyi = 0.0;
    double gap_bound_tv = 0.0;
    double epsilon = 0.0;     // Renyi level backing the bounds
    double epsilon_tv = 0.0;
    double lambda = 1.0;
    int mc_samples = 0;
    std::uint64_t seed = 0;
    nlohmann::json attack_spec;

    nlohmann::json to_json() const;
};

// Runs the attack over the dataset and assembles risks, entropy terms and
// both gap bounds. The Renyi level comes from the net's noise certificate
// with the attack ball converted into the noise's natural norm; a
// deterministic net gets level 0 at alpha == 0 and +infinity otherwise.
RiskReport risk_report(const RandomizedNet& net, const Dataset& data, const AttackSpec& attack,
                       double lambda, int n_mc, std::uint64_t seed);

struct CurveRow {
    double alpha;
    double epsilon;
    double exp_neg_shannon;
    double gap_bound;
    double guaranteed_accuracy;
};

// One row per budget: certificate level at delta == alpha (input-level
// noise, alpha in the noise's natural norm), the resulting gap bound, and
// natural accuracy minus the gap clamped at zero.
std::vector<CurveRow> guaranteed_accuracy_curve(const RandomizedNet& net, const Dataset& data,
                                                const std::vector<double>& alpha_grid,
                                                double lambda, int n_mc, std::uint64_t seed,
                                                double prefix_scale = 1.0);

std::string curve_to_csv(const std::vector<CurveRow>& rows);

struct PredictionChangeReport {
    double alpha = 0.0;
    double epsilon = 0.0;
    double fraction = 0.0;  // inputs where the attack pushed the label law
                            // further than epsilon in KL

    nlohmann::json to_json() const;
};

// Empirical share of inputs with an attack-found tau such that
// KL(law(x+tau) || law(x)) > epsilon; both laws use the same draw stream so
// tau == 0 compares identical samples.
PredictionChangeReport prediction_change_fraction(const RandomizedNet& net, const Dataset& data,
                                                  const AttackSpec& attack, double epsilon,
                                                  int n_mc, std::uint64_t seed);

}  // namespace renoir

#endif
