#include "renoir/certify.hpp"

#include <cmath>
#include <limits>

#include "renoir/rng.hpp"

namespace renoir {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double vector_norm(const Eigen::VectorXd& v, Norm n) {
    switch (n) {
        case Norm::L1: return v.lpNorm<1>();
        case Norm::L2: return v.norm();
        case Norm::Linf: return v.lpNorm<Eigen::Infinity>();
    }
    return 0.0;
}

std::string lambda_to_string(double lambda) {
    return std::isinf(lambda) ? "inf" : format_g9(lambda);
}
}  // namespace

const char* sensitivity_method_name(SensitivityMethod m) {
    switch (m) {
        case SensitivityMethod::ExactLinear: return "ExactLinear";
        case SensitivityMethod::LipschitzProduct: return "LipschitzProduct";
        case SensitivityMethod::BruteForce: return "BruteForce";
    }
    return "?";
}

nlohmann::json Sensitivity::to_json() const {
    return {{"value", value},
            {"alpha", alpha},
            {"norms", {norm_name(input_norm), norm_name(output_norm)}},
            {"method", sensitivity_method_name(method)}};
}

Sensitivity sensitivity_linear(const Eigen::MatrixXd& W, double alpha, Norm input_norm,
                               Norm output_norm) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    double opnorm = 0.0;
    if (input_norm == Norm::L2 && output_norm == Norm::L2) {
        opnorm = W.jacobiSvd().singularValues()(0);
    } else if (input_norm == Norm::L1 && output_norm == Norm::L1) {
        opnorm = W.cwiseAbs().colwise().sum().maxCoeff();
    } else if (input_norm == Norm::Linf && output_norm == Norm::Linf) {
        opnorm = W.cwiseAbs().rowwise().sum().maxCoeff();
    } else if (input_norm == Norm::Linf && output_norm == Norm::L2) {
        const int d = static_cast<int>(W.cols());
        if (d > 16)
            throw std::invalid_argument(
                "(linf,l2) vertex enumeration is limited to 16 columns; use BruteForce method");
        Eigen::VectorXd s(d);
        for (std::uint64_t mask = 0; mask < (1ull << d); ++mask) {
            for (int j = 0; j < d; ++j) s(j) = (mask >> j) & 1 ? 1.0 : -1.0;
            opnorm = std::max(opnorm, (W * s).norm());
        }
    } else {
        throw std::invalid_argument(std::string("unsupported norm pair (") +
                                    norm_name(input_norm) + "," + norm_name(output_norm) + ")");
    }
    return {alpha, input_norm, output_norm, alpha * opnorm, SensitivityMethod::ExactLinear};
}

double identity_ball_radius(double alpha, Norm from, Norm to, int dim) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
    const double d = static_cast<double>(dim);
    if (from == to) return alpha;
    if (from == Norm::L1) return alpha;                            // l1 ball is the smallest
    if (from == Norm::L2) return to == Norm::L1 ? alpha * std::sqrt(d) : alpha;
    /* from == Linf */ return to == Norm::L1 ? alpha * d : alpha * std::sqrt(d);
}

Sensitivity sensitivity_bruteforce(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   double alpha, Norm input_norm, Norm output_norm,
                                   const BruteForceSpec& spec, std::uint64_t seed) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (spec.pairs < 10000) throw std::invalid_argument("brute-force budget must be >= 10^4 pairs");
    if (spec.lower.size() != spec.upper.size() || spec.lower.size() == 0)
        throw std::invalid_argument("domain bounds are malformed");
    const int d = static_cast<int>(spec.lower.size());

    rng::Stream stream(seed, rng::kBruteForce);
    double best = 0.0;
    Eigen::VectorXd x(d), dir(d), y(d);
    for (std::int64_t it = 0; it < spec.pairs; ++it) {
        for (int j = 0; j < d; ++j)
            x(j) = spec.lower(j) + (spec.upper(j) - spec.lower(j)) * stream.next_double();
        for (int j = 0; j < d; ++j) dir(j) = stream.next_gauss();
        const double dn = vector_norm(dir, input_norm);
        if (dn == 0.0) continue;
        // Full-radius step, then clamp to the box; clamping only shrinks the
        // coordinate gaps so |x-y|_A <= alpha still holds.
        y = x + (alpha / dn) * dir;
        y = y.cwiseMax(spec.lower).cwiseMin(spec.upper);
        best = std::max(best, vector_norm(f(x) - f(y), output_norm));
    }
    return {alpha, input_norm, output_norm, best, SensitivityMethod::BruteForce};
}

Sensitivity sensitivity_lipschitz(std::span<const Layer> prefix, double alpha, Norm norm) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (norm != Norm::L1 && norm != Norm::L2)
        throw std::invalid_argument("lipschitz products support the (l1,l1) and (l2,l2) pairs");
    double product = 1.0;
    for (const Layer& layer : prefix) {
        if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
            product *= sensitivity_linear(lin->W, 1.0, norm, norm).value;
        } else if (const auto* act = std::get_if<LeakyReluLayer>(&layer)) {
            product *= std::max(1.0, std::abs(act->slope));
        } else {
            throw std::invalid_argument("unknown layer kind in prefix");
        }
    }
    return {alpha, norm, norm, alpha * product, SensitivityMethod::LipschitzProduct};
}

nlohmann::json RobustnessCertificate::to_json() const {
    nlohmann::json j{{"alpha", alpha},
                     {"epsilon", epsilon},
                     {"gamma", gamma},
                     {"metric", metric_name(metric)},
                     {"noise", noise_spec},
                     {"delta", delta.to_json()},
                     {"provenance", provenance}};
    if (std::isinf(lambda))
        j["lambda"] = "inf";
    else
        j["lambda"] = lambda;
    return j;
}

RobustnessCertificate RobustnessCertificate::from_json(const nlohmann::json& j) {
    RobustnessCertificate c;
    c.alpha = j.at("alpha").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.metric = metric_from_name(j.at("metric").get<std::string>());
    if (j.at("lambda").is_string())
        c.lambda = kInf;
    else
        c.lambda = j.at("lambda").get<double>();
    c.noise_spec = j.at("noise");
    if (j.contains("provenance")) c.provenance = j.at("provenance").get<std::string>();
    const auto& dj = j.at("delta");
    c.delta.value = dj.at("value").get<double>();
    if (dj.contains("alpha")) c.delta.alpha = dj.at("alpha").get<double>();
    c.delta.input_norm = norm_from_name(dj.at("norms").at(0).get<std::string>());
    c.delta.output_norm = norm_from_name(dj.at("norms").at(1).get<std::string>());
    const std::string method = dj.at("method").get<std::string>();
    if (method == "ExactLinear")
        c.delta.method = SensitivityMethod::ExactLinear;
    else if (method == "LipschitzProduct")
        c.delta.method = SensitivityMethod::LipschitzProduct;
    else if (method == "BruteForce")
        c.delta.method = SensitivityMethod::BruteForce;
    else
        throw std::invalid_argument("unknown sensitivity method '" + method + "'");
    return c;
}

RobustnessCertificate certificate(const NoiseModel& noise, const Sensitivity& delta, double lambda) {
    if (!(lambda >= 1.0)) throw std::invalid_argument("order lambda must be >= 1");
    if (delta.method == SensitivityMethod::BruteForce)
        throw std::invalid_argument("brute-force sensitivities are lower bounds and cannot back a certificate");

    RobustnessCertificate cert;
    cert.alpha = delta.alpha;
    cert.lambda = lambda;
    cert.gamma = 0.0;
    cert.metric = MetricKind::Renyi;
    cert.delta = delta;
    cert.noise_spec = noise.to_json();

    if (noise.family() == NoiseFamily::Gaussian) {
        if (std::isinf(lambda))
            throw std::invalid_argument("the Gaussian certificate needs a finite order");
        if (delta.output_norm != Norm::L2)
            throw std::invalid_argument("the Gaussian certificate needs an l2 sensitivity");
        cert.epsilon = lambda * delta.value * delta.value / (2.0 * noise.sigma_min());
        cert.provenance = std::string("gaussian sigma_min=") + format_g9(noise.sigma_min()) +
                          " delta=" + format_g9(delta.value) + " (" +
                          sensitivity_method_name(delta.method) + ") lambda=" +
                          lambda_to_string(lambda);
    } else {
        if (delta.output_norm != Norm::L1)
            throw std::invalid_argument("the Laplace certificate needs an l1 sensitivity");
        // theta-term vanishes for this family; the carrier term is delta/b.
        // Order-independent, so valid at every lambda up to infinity.
        cert.epsilon = noise.carrier_modulus()(delta.value);
        cert.provenance = std::string("laplace b=") + format_g9(noise.scale_b()) +
                          " delta=" + format_g9(delta.value) + " (" +
                          sensitivity_method_name(delta.method) + "), any order";
    }
    return cert;
}

RobustnessCertificate convert_certificate(const RobustnessCertificate& cert, MetricKind target,
                                          double diam) {
    if (cert.metric != MetricKind::Renyi)
        throw std::invalid_argument("only Renyi certificates can be converted");
    RobustnessCertificate out = cert;
    out.metric = target;
    switch (target) {
        case MetricKind::Renyi:
            return out;
        case MetricKind::TV:
            out.epsilon = renyi_to_tv(cert.epsilon);
            return out;
        case MetricKind::Hellinger:
            out.epsilon = renyi_to_ladder(cert.epsilon, false, diam).hellinger;
            return out;
        case MetricKind::Prokhorov:
            out.epsilon = renyi_to_ladder(cert.epsilon, false, diam).prokhorov;
            return out;
        case MetricKind::Discrepancy:
            out.epsilon = renyi_to_ladder(cert.epsilon, false, diam).discrepancy;
            return out;
        case MetricKind::Wasserstein:
            out.epsilon = renyi_to_ladder(cert.epsilon, false, diam).wasserstein;
            return out;
        case MetricKind::Separation: {
            if (!std::isinf(cert.lambda))
                throw std::invalid_argument("separation conversion needs an infinite order");
            const auto ladder = renyi_to_ladder(cert.epsilon, true, diam);
            out.epsilon = *ladder.separation;
            return out;
        }
        case MetricKind::KL:
            throw std::invalid_argument("no converter targets the KL divergence");
    }
    throw std::invalid_argument("unknown target metric");
}

}  // namespace renoir
