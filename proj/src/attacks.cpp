#include "renoir/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "renoir/rng.hpp"

namespace renoir {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clip_box(Eigen::VectorXd v) {
    return v.cwiseMax(-1.0).cwiseMin(1.0);
}

double attack_norm(const Eigen::VectorXd& r, Norm n) {
    switch (n) {
        case Norm::L1: return r.lpNorm<1>();
        case Norm::L2: return r.norm();
        case Norm::Linf: return r.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd p = (logits.array() - logits.maxCoeff()).exp();
    return p / p.sum();
}

int runner_up(const Eigen::VectorXd& probs, int y) {
    int best = y == 0 ? 1 : 0;
    for (int i = 0; i < probs.size(); ++i)
        if (i != y && probs(i) > probs(best)) best = i;
    return best;
}

// Margin objective of the optimization attacks on one draw's logits:
// max(F_y - max_{i!=y} F_i, -kappa), with its gradient at the logits.
double margin_and_delta(const Eigen::VectorXd& logits, int y, double kappa,
                        Eigen::VectorXd* delta) {
    const Eigen::VectorXd probs = softmax(logits);
    const int i2 = runner_up(probs, y);
    const double margin = probs(y) - probs(i2);
    if (delta) {
        delta->setZero(logits.size());
        if (margin > -kappa) {
            // d(F_y - F_i2)/dz_b through the softmax Jacobian.
            for (int b = 0; b < logits.size(); ++b)
                (*delta)(b) = probs(y) * ((b == y ? 1.0 : 0.0) - probs(b)) -
                              probs(i2) * ((b == i2 ? 1.0 : 0.0) - probs(b));
        }
    }
    return std::max(margin, -kappa);
}

// EoT-averaged gradient at the input of the margin objective.
Eigen::VectorXd eot_margin_gradient(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                                    double kappa, int m, std::uint64_t seed, EotMode mode) {
    if (!net.has_noise()) {
        Eigen::VectorXd delta;
        margin_and_delta(net.forward_deterministic(x), y, kappa, &delta);
        return input_gradient_for_delta(net, x, delta, seed);
    }
    if (mode == EotMode::AvgLogits) {
        Eigen::VectorXd mean_logits = Eigen::VectorXd::Zero(net.num_classes());
        for (int t = 0; t < m; ++t)
            mean_logits += net.forward_noisy(x, rng::derive(seed, static_cast<std::uint64_t>(t)));
        mean_logits /= static_cast<double>(m);
        Eigen::VectorXd delta;
        margin_and_delta(mean_logits, y, kappa, &delta);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
        for (int t = 0; t < m; ++t)
            g += input_gradient_for_delta(net, x, delta, rng::derive(seed, static_cast<std::uint64_t>(t)));
        return g / static_cast<double>(m);
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (int t = 0; t < m; ++t) {
        const std::uint64_t s = rng::derive(seed, static_cast<std::uint64_t>(t));
        Eigen::VectorXd delta;
        margin_and_delta(net.forward_noisy(x, s), y, kappa, &delta);
        g += input_gradient_for_delta(net, x, delta, s);
    }
    return g / static_cast<double>(m);
}

bool judge_flipped(const RandomizedNet& net, const Eigen::VectorXd& x_adv, int y,
                   const AttackSpec& spec) {
    const std::uint64_t judge_seed = rng::derive(spec.seed, rng::kAttackJudge);
    return net.predict_majority(x_adv, spec.judge_mc, judge_seed) != y;
}

}  // namespace

const char* attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::PGD: return "pgd";
        case AttackKind::CW: return "cw";
        case AttackKind::EAD: return "ead";
        case AttackKind::Grid: return "grid";
    }
    return "?";
}

AttackKind attack_kind_from_name(const std::string& name) {
    if (name == "pgd") return AttackKind::PGD;
    if (name == "cw") return AttackKind::CW;
    if (name == "ead") return AttackKind::EAD;
    if (name == "grid") return AttackKind::Grid;
    throw std::invalid_argument("unknown attack kind '" + name + "'");
}

nlohmann::json AttackSpec::to_json() const {
    return {{"kind", attack_kind_name(kind)},
            {"norm", norm_name(norm)},
            {"alpha", alpha},
            {"steps", steps},
            {"step_size", step_size},
            {"eot_samples", eot_samples},
            {"eot_mode", eot_mode == EotMode::LossGrad ? "loss" : "logits"},
            {"seed", seed},
            {"random_start", random_start},
            {"kappa", kappa},
            {"c_lo", c_lo},
            {"c_hi", c_hi},
            {"binary_steps", binary_steps},
            {"learning_rate", learning_rate},
            {"c1", c1},
            {"c2", c2},
            {"grid_resolution", grid_resolution},
            {"grid_eval_mc", grid_eval_mc},
            {"judge_mc", judge_mc}};
}

AttackSpec AttackSpec::from_json(const nlohmann::json& j) {
    AttackSpec s;
    s.kind = attack_kind_from_name(j.at("kind").get<std::string>());
    s.norm = s.kind == AttackKind::PGD ? Norm::Linf
             : s.kind == AttackKind::CW ? Norm::L2
             : s.kind == AttackKind::EAD ? Norm::L1
                                         : Norm::L2;
    if (j.contains("norm")) s.norm = norm_from_name(j.at("norm").get<std::string>());
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("steps")) s.steps = j.at("steps").get<int>();
    if (j.contains("step_size")) s.step_size = j.at("step_size").get<double>();
    if (j.contains("eot_samples")) s.eot_samples = j.at("eot_samples").get<int>();
    if (j.contains("eot_mode")) {
        const std::string mode = j.at("eot_mode").get<std::string>();
        if (mode == "loss")
            s.eot_mode = EotMode::LossGrad;
        else if (mode == "logits")
            s.eot_mode = EotMode::AvgLogits;
        else
            throw std::invalid_argument("unknown eot_mode '" + mode + "'");
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("random_start")) s.random_start = j.at("random_start").get<bool>();
    if (j.contains("kappa")) s.kappa = j.at("kappa").get<double>();
    if (j.contains("c_lo")) s.c_lo = j.at("c_lo").get<double>();
    if (j.contains("c_hi")) s.c_hi = j.at("c_hi").get<double>();
    if (j.contains("binary_steps")) s.binary_steps = j.at("binary_steps").get<int>();
    if (j.contains("learning_rate")) s.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("c1")) s.c1 = j.at("c1").get<double>();
    if (j.contains("c2")) s.c2 = j.at("c2").get<double>();
    if (j.contains("grid_resolution")) s.grid_resolution = j.at("grid_resolution").get<int>();
    if (j.contains("grid_eval_mc")) s.grid_eval_mc = j.at("grid_eval_mc").get<int>();
    if (j.contains("judge_mc")) s.judge_mc = j.at("judge_mc").get<int>();

    if (s.alpha < 0.0) throw std::invalid_argument("attack alpha must be >= 0");
    if (s.steps < 1) throw std::invalid_argument("attack steps must be >= 1");
    if (s.eot_samples < 1) throw std::invalid_argument("eot_samples must be >= 1");
    return s;
}

Eigen::VectorXd eot_gradient(const RandomizedNet& net, const Eigen::VectorXd& x, int y, int m,
                             std::uint64_t seed, EotMode mode) {
    if (m < 1) throw std::invalid_argument("eot sample count must be >= 1");
    if (!net.has_noise()) return input_gradient(net, x, y, seed);

    std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(m));
    if (mode == EotMode::AvgLogits) {
        std::vector<Eigen::VectorXd> logits(static_cast<std::size_t>(m));
        for (int t = 0; t < m; ++t)
            logits[static_cast<std::size_t>(t)] =
                net.forward_noisy(x, rng::derive(seed, static_cast<std::uint64_t>(t)));
        Eigen::VectorXd mean_logits = Eigen::VectorXd::Zero(net.num_classes());
        for (const auto& l : logits) mean_logits += l;
        mean_logits /= static_cast<double>(m);
        Eigen::VectorXd delta = softmax(mean_logits);
        delta(y) -= 1.0;
        for (int t = 0; t < m; ++t)
            grads[static_cast<std::size_t>(t)] =
                input_gradient_for_delta(net, x, delta, rng::derive(seed, static_cast<std::uint64_t>(t)));
    } else {
        for (int t = 0; t < m; ++t)
            grads[static_cast<std::size_t>(t)] =
                input_gradient(net, x, y, rng::derive(seed, static_cast<std::uint64_t>(t)));
    }
    return pairwise_vector_sum(grads) / static_cast<double>(m);
}

AttackResult pgd(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                 const AttackSpec& spec) {
    if (spec.kind != AttackKind::PGD) throw std::invalid_argument("spec kind is not pgd");
    if (spec.norm != Norm::Linf) throw std::invalid_argument("pgd works on the linf ball");
    const double alpha = spec.alpha;
    const double step = spec.step_size > 0.0 ? spec.step_size : alpha / 4.0;

    Eigen::VectorXd xt = x;
    if (spec.random_start) {
        rng::Stream init(spec.seed, rng::kAttackInit);
        for (int j = 0; j < xt.size(); ++j) xt(j) += alpha * (2.0 * init.next_double() - 1.0);
        xt = clip_box(xt);
    }
    const std::uint64_t eot_base = rng::derive(spec.seed, rng::kAttackEot);
    for (int t = 0; t < spec.steps; ++t) {
        const Eigen::VectorXd g = eot_gradient(net, xt, y, spec.eot_samples,
                                               rng::derive(eot_base, static_cast<std::uint64_t>(t)),
                                               spec.eot_mode);
        for (int j = 0; j < xt.size(); ++j) {
            const double s = g(j) > 0.0 ? 1.0 : (g(j) < 0.0 ? -1.0 : 0.0);
            xt(j) += step * s;
        }
        xt = xt.cwiseMax((x.array() - alpha).matrix()).cwiseMin((x.array() + alpha).matrix());
        xt = clip_box(xt);
    }
    AttackResult result;
    result.x_adv = xt;
    result.perturbation_norm = attack_norm(xt - x, Norm::Linf);
    result.success = judge_flipped(net, xt, y, spec);
    return result;
}

AttackResult cw_l2(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                   const AttackSpec& spec) {
    if (spec.kind != AttackKind::CW) throw std::invalid_argument("spec kind is not cw");

    // Optimize in w-space with x_adv = tanh(w), which keeps iterates inside
    // the open box.
    const Eigen::VectorXd w0 = x.unaryExpr([](double v) {
        return std::atanh(std::clamp(v, -1.0 + 1e-9, 1.0 - 1e-9));
    });

    AttackResult best;
    best.x_adv = x;
    best.success = false;
    best.perturbation_norm = kInf;
    if (judge_flipped(net, x, y, spec)) {
        best.success = true;
        best.perturbation_norm = 0.0;
        return best;
    }

    double lo = spec.c_lo;
    double hi = spec.c_hi;
    const std::uint64_t eot_base = rng::derive(spec.seed, rng::kAttackEot);
    for (int bstep = 0; bstep < spec.binary_steps; ++bstep) {
        const double c = 0.5 * (lo + hi);
        Eigen::VectorXd w = w0;
        bool success_at_c = false;
        for (int it = 0; it < spec.steps; ++it) {
            const Eigen::VectorXd x_adv = w.array().tanh();
            const Eigen::VectorXd r = x_adv - x;
            const double rnorm = r.norm();

            const std::uint64_t eot_seed =
                rng::derive(rng::derive(eot_base, static_cast<std::uint64_t>(bstep)),
                            static_cast<std::uint64_t>(it));
            Eigen::VectorXd grad_x = eot_margin_gradient(net, x_adv, y, spec.kappa,
                                                         spec.eot_samples, eot_seed, spec.eot_mode);
            if (rnorm > 1e-12) grad_x += (c / rnorm) * r;
            const Eigen::VectorXd dxdw = (1.0 - x_adv.array().square()).matrix();
            w -= spec.learning_rate * grad_x.cwiseProduct(dxdw);

            const Eigen::VectorXd candidate = clip_box(w.array().tanh());
            if (judge_flipped(net, candidate, y, spec)) {
                success_at_c = true;
                const double cand_norm = (candidate - x).norm();
                if (cand_norm < best.perturbation_norm) {
                    best.x_adv = candidate;
                    best.success = true;
                    best.perturbation_norm = cand_norm;
                }
            }
        }
        // Success leaves room to weight distance harder; failure means the
        // distance weight was already too strong.
        if (success_at_c)
            lo = c;
        else
            hi = c;
    }
    if (!best.success) best.perturbation_norm = 0.0;
    return best;
}

AttackResult ead_l1(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                    const AttackSpec& spec) {
    if (spec.kind != AttackKind::EAD) throw std::invalid_argument("spec kind is not ead");

    AttackResult best;
    best.x_adv = x;
    best.success = false;
    best.perturbation_norm = kInf;
    if (judge_flipped(net, x, y, spec)) {
        best.success = true;
        best.perturbation_norm = 0.0;
        return best;
    }

    const double lr = spec.learning_rate;
    const double threshold = spec.c1 * lr;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(x.size());
    const std::uint64_t eot_base = rng::derive(spec.seed, rng::kAttackEot);
    for (int it = 0; it < spec.steps; ++it) {
        Eigen::VectorXd grad = eot_margin_gradient(net, x + r, y, spec.kappa, spec.eot_samples,
                                                   rng::derive(eot_base, static_cast<std::uint64_t>(it)),
                                                   spec.eot_mode);
        const double rnorm = r.norm();
        if (rnorm > 1e-12) grad += (spec.c2 / rnorm) * r;

        const Eigen::VectorXd u = r - lr * grad;
        // ISTA step: soft-threshold the l1 term, then re-enter the box.
        for (int j = 0; j < r.size(); ++j) {
            if (u(j) > threshold)
                r(j) = u(j) - threshold;
            else if (u(j) < -threshold)
                r(j) = u(j) + threshold;
            else
                r(j) = 0.0;
        }
        r = clip_box(x + r) - x;

        if (judge_flipped(net, x + r, y, spec)) {
            const double l1 = r.lpNorm<1>();
            if (l1 < best.perturbation_norm) {
                best.x_adv = x + r;
                best.success = true;
                best.perturbation_norm = l1;
            }
        }
    }
    if (!best.success) best.perturbation_norm = 0.0;
    return best;
}

AttackResult grid_attack(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                         const AttackSpec& spec) {
    if (spec.kind != AttackKind::Grid) throw std::invalid_argument("spec kind is not grid");
    const int d = static_cast<int>(x.size());
    if (d > 3) throw std::invalid_argument("grid attack supports dimension <= 3");
    if (spec.grid_resolution < 1) throw std::invalid_argument("grid resolution must be >= 1");

    const std::uint64_t eval_seed = rng::derive(spec.seed, rng::kEval);
    auto misclass_count = [&](const Eigen::VectorXd& candidate) {
        int wrong = 0;
        if (!net.has_noise())
            return argmax_logits(net.forward_deterministic(candidate)) != y ? spec.grid_eval_mc : 0;
        for (int t = 0; t < spec.grid_eval_mc; ++t)
            if (argmax_logits(net.forward_noisy(
                    candidate, rng::derive(eval_seed, static_cast<std::uint64_t>(t)))) != y)
                ++wrong;
        return wrong;
    };

    Eigen::VectorXd best_x = x;
    int best_score = misclass_count(x);

    const int res = spec.grid_resolution;
    if (spec.alpha > 0.0 && res > 1) {
        std::vector<double> axis(static_cast<std::size_t>(res));
        for (int i = 0; i < res; ++i)
            axis[static_cast<std::size_t>(i)] =
                -spec.alpha + 2.0 * spec.alpha * static_cast<double>(i) / (res - 1);
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        Eigen::VectorXd tau(d);
        for (;;) {
            for (int j = 0; j < d; ++j) tau(j) = axis[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            if (attack_norm(tau, spec.norm) <= spec.alpha + 1e-12) {
                const Eigen::VectorXd candidate = clip_box(x + tau);
                const int score = misclass_count(candidate);
                if (score > best_score) {
                    best_score = score;
                    best_x = candidate;
                }
            }
            int j = 0;
            for (; j < d; ++j) {
                if (++idx[static_cast<std::size_t>(j)] < res) break;
                idx[static_cast<std::size_t>(j)] = 0;
            }
            if (j == d) break;
        }
    }

    AttackResult result;
    result.x_adv = best_x;
    result.perturbation_norm = attack_norm(best_x - x, spec.norm);
    result.success = judge_flipped(net, best_x, y, spec);
    return result;
}

AttackResult run_attack(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                        const AttackSpec& spec) {
    switch (spec.kind) {
        case AttackKind::PGD: return pgd(net, x, y, spec);
        case AttackKind::CW: return cw_l2(net, x, y, spec);
        case AttackKind::EAD: return ead_l1(net, x, y, spec);
        case AttackKind::Grid: return grid_attack(net, x, y, spec);
    }
    throw std::invalid_argument("unknown attack kind");
}

}  // namespace renoir
