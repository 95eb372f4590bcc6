#ifndef RENOIR_CERTIFY_HPP
#define RENOIR_CERTIFY_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "json.hpp"
#include "renoir/distributions.hpp"
#include "renoir/divergences.hpp"
#include "renoir/net.hpp"

namespace renoir {

enum class SensitivityMethod { ExactLinear, LipschitzProduct, BruteForce };

const char* sensitivity_method_name(SensitivityMethod m);

// Largest output displacement a perturbation of input norm <= alpha can
// cause. ExactLinear and LipschitzProduct are sound upper bounds;
// BruteForce is a sampled lower bound and never backs a shipped certificate.
struct Sensitivity {
    double alpha = 0.0;
    Norm input_norm = Norm::L2;
    Norm output_norm = Norm::L2;
    double value = 0.0;
    SensitivityMethod method = SensitivityMethod::ExactLinear;

    nlohmann::json to_json() const;
};

// alpha times the (input_norm -> output_norm) operator norm of W.
// Supported pairs: (l2,l2), (l1,l1), (linf,linf) in closed form and
// (linf,l2) by sign-vertex enumeration for up to 16 columns.
Sensitivity sensitivity_linear(const Eigen::MatrixXd& W, double alpha, Norm input_norm,
                               Norm output_norm);

// sup of |tau|_B over |tau|_A <= alpha for the identity map on R^d. Exact.
double identity_ball_radius(double alpha, Norm from, Norm to, int dim);

struct BruteForceSpec {
    Eigen::VectorXd lower;  // domain box
    Eigen::VectorXd upper;
    std::int64_t pairs = 10000;
};

// Sampled sup of |f(x)-f(y)|_B over pairs with |x-y|_A <= alpha inside the
// box. A lower bound; used as a test oracle.
Sensitivity sensitivity_bruteforce(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   double alpha, Norm input_norm, Norm output_norm,
                                   const BruteForceSpec& spec, std::uint64_t seed);

// alpha times the product of per-layer operator norms over a network
// prefix, in a matching (p,p) norm pair with p in {l1, l2}. Activations
// contribute their exact Lipschitz constant (leaky-relu: max(1, slope)).
// Always an upper bound on the true prefix sensitivity; an empty prefix is
// the identity and gives alpha itself.
Sensitivity sensitivity_lipschitz(std::span<const Layer> prefix, double alpha,
                                  Norm norm = Norm::L2);

struct RobustnessCertificate {
    double alpha = 0.0;
    double epsilon = 0.0;
    double lambda = 1.0;  // may be +infinity
    double gamma = 0.0;
    MetricKind metric = MetricKind::Renyi;
    Sensitivity delta;
    nlohmann::json noise_spec;
    std::string provenance;

    nlohmann::json to_json() const;
    static RobustnessCertificate from_json(const nlohmann::json& j);
};

// Divergence level the noise guarantees between output laws of any two
// inputs within the sensitivity budget. Gaussian: lambda*delta^2/(2*sigma_min)
// with delta in l2. Laplace: delta/b with delta in l1, any order up to
// infinity. Uniform over inputs, so gamma == 0.
RobustnessCertificate certificate(const NoiseModel& noise, const Sensitivity& delta, double lambda);

// Re-expresses a Renyi certificate in a weaker metric; alpha and gamma are
// unchanged, epsilon maps through the corresponding converter.
RobustnessCertificate convert_certificate(const RobustnessCertificate& cert, MetricKind target,
                                          double diam = 1.0);

}  // namespace renoir

#endif
