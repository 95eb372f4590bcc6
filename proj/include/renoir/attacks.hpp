#ifndef RENOIR_ATTACKS_HPP
#define RENOIR_ATTACKS_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "json.hpp"
#include "renoir/net.hpp"

namespace renoir {

enum class AttackKind { PGD, CW, EAD, Grid };

const char* attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

// How the noise average enters the crafted gradient: LossGrad averages the
// per-draw loss gradients; AvgLogits differentiates the loss of the
// noise-averaged logits instead.
enum class EotMode { LossGrad, AvgLogits };

struct AttackSpec {
    AttackKind kind = AttackKind::PGD;
    Norm norm = Norm::Linf;
    double alpha = 0.0;      // budget (PGD, Grid)
    int steps = 20;
    double step_size = 0.0;  // PGD step; 0 picks alpha/4
    int eot_samples = 80;
    EotMode eot_mode = EotMode::LossGrad;
    std::uint64_t seed = 0;
    bool random_start = true;  // PGD start inside the ball

    // CW
    double kappa = 0.0;
    double c_lo = 1e-3;
    double c_hi = 10.0;
    int binary_steps = 6;
    double learning_rate = 0.05;

    // EAD
    double c1 = 1e-2;
    double c2 = 1.0;

    // Grid oracle
    int grid_resolution = 11;  // points per axis across [-alpha, alpha]
    int grid_eval_mc = 100;    // draws per candidate when scoring

    // Draws for the post-hoc majority vote that judges success.
    int judge_mc = 100;

    nlohmann::json to_json() const;
    static AttackSpec from_json(const nlohmann::json& j);
};

// Mean over m draws of the input gradient of the cross-entropy (streams
// (seed, t)). A deterministic net short-circuits to its plain gradient.
Eigen::VectorXd eot_gradient(const RandomizedNet& net, const Eigen::VectorXd& x, int y, int m,
                             std::uint64_t seed, EotMode mode = EotMode::LossGrad);

struct AttackResult {
    Eigen::VectorXd x_adv;
    bool success = false;            // majority vote flipped away from y
    double perturbation_norm = 0.0;  // in the attack's norm
};

// Iterated sign steps projected onto the linf ball and the [-1,1] box.
AttackResult pgd(const RandomizedNet& net, const Eigen::VectorXd& x, int y, const AttackSpec& spec);

// tanh-reparameterized least-l2 search, binary search over the distance
// weight c; failure returns the natural input.
AttackResult cw_l2(const RandomizedNet& net, const Eigen::VectorXd& x, int y, const AttackSpec& spec);

// Iterative-shrinkage variant with the elastic-net objective
// c1*|r|_1 + c2*|r|_2 + margin; soft-threshold at c1*learning_rate.
AttackResult ead_l1(const RandomizedNet& net, const Eigen::VectorXd& x, int y, const AttackSpec& spec);

// Exhaustive search over a grid inside the ball, d <= 3 only; returns the
// candidate with the highest sampled misclassification rate. Serves as the
// small-scale oracle for the true worst perturbation.
AttackResult grid_attack(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                         const AttackSpec& spec);

AttackResult run_attack(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                        const AttackSpec& spec);

}  // namespace renoir

#endif
