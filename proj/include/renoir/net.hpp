#ifndef RENOIR_NET_HPP
#define RENOIR_NET_HPP

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "renoir/distributions.hpp"
#include "renoir/divergences.hpp"

namespace renoir {

struct LinearLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

struct LeakyReluLayer {
    double slope = 0.1;
};

using Layer = std::variant<LinearLayer, LeakyReluLayer>;

// Inputs live in [-1,1]^d; labels in [0, num_classes).
class Dataset {
public:
    Dataset(Eigen::MatrixXd inputs, std::vector<int> labels, int num_classes);

    std::int64_t size() const { return inputs_.rows(); }
    int dim() const { return static_cast<int>(inputs_.cols()); }
    int num_classes() const { return num_classes_; }
    const Eigen::MatrixXd& inputs() const { return inputs_; }
    const std::vector<int>& labels() const { return labels_; }
    Eigen::VectorXd input(std::int64_t i) const { return inputs_.row(i).transpose(); }
    int label(std::int64_t i) const { return labels_[static_cast<std::size_t>(i)]; }

    // Largest pairwise distance between inputs under the given norm.
    double diameter(Norm n) const;

private:
    Eigen::MatrixXd inputs_;
    std::vector<int> labels_;
    int num_classes_;
};

// Feedforward classifier with one additive noise site. noise_layer_index i
// adds a draw to the output of layer i (i == 0 perturbs the input itself);
// an empty noise slot is the deterministic sentinel. The final layer is
// linear and emits num_classes logits; softmax lives in the loss.
class RandomizedNet {
public:
    RandomizedNet(std::vector<Layer> layers, int noise_layer_index,
                  std::optional<NoiseModel> noise, int num_classes);

    int input_dim() const { return input_dim_; }
    int num_classes() const { return num_classes_; }
    int noise_layer_index() const { return noise_layer_index_; }
    bool has_noise() const { return noise_.has_value(); }
    const NoiseModel& noise() const;
    const std::vector<Layer>& layers() const { return layers_; }
    std::span<const Layer> prefix_layers() const;  // layers before the noise site

    // One noise draw, fully determined by the seed.
    Eigen::VectorXd forward_noisy(const Eigen::VectorXd& x, std::uint64_t seed) const;
    Eigen::VectorXd forward_deterministic(const Eigen::VectorXd& x) const;

    // Empirical law of argmax logits over n_mc draws (streams (seed, t)).
    DiscreteDistribution predict_distribution(const Eigen::VectorXd& x, int n_mc,
                                              std::uint64_t seed) const;
    int predict_majority(const Eigen::VectorXd& x, int n_mc, std::uint64_t seed) const;

    nlohmann::json to_json() const;
    static RandomizedNet from_json(const nlohmann::json& j);

    // Mutable weight access for the optimizer.
    std::vector<Layer>& mutable_layers() { return layers_; }

private:
    void validate() const;

    std::vector<Layer> layers_;
    int noise_layer_index_;
    std::optional<NoiseModel> noise_;
    int input_dim_;
    int num_classes_;
};

int argmax_logits(const Eigen::VectorXd& logits);

// Per-linear-layer weight gradients plus the input gradient.
struct NetGradients {
    std::vector<Eigen::MatrixXd> dW;  // one entry per layer; empty for activations
    std::vector<Eigen::VectorXd> db;
    Eigen::VectorXd dx;
};

// Mean cross-entropy over the batch with one noise draw per example
// (seeds[j] fixes example j's draw). Gradients are exact reverse-mode and
// the mean uses pairwise reduction, so duplicating the batch together with
// its seeds reproduces the same loss and gradient bit for bit.
double loss_and_grad(const RandomizedNet& net, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::span<const std::uint64_t> seeds,
                     NetGradients* grads);
double loss_and_grad(const RandomizedNet& net, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::uint64_t seed, NetGradients* grads);

// Gradient of the single-example cross-entropy with respect to the input,
// noise draw fixed by seed.
Eigen::VectorXd input_gradient(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                               std::uint64_t seed);

// Input gradient for a caller-supplied gradient at the logits (same fixed
// noise draw). Lets attacks differentiate objectives other than the loss.
Eigen::VectorXd input_gradient_for_delta(const RandomizedNet& net, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& logit_delta, std::uint64_t seed);

// Recursive-halving sum of equal-length vectors; see pairwise_sum.
Eigen::VectorXd pairwise_vector_sum(const std::vector<Eigen::VectorXd>& v);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double momentum = 0.9;
    // Piecewise-constant rate: (first epoch, rate) knots in ascending order.
    std::vector<std::pair<int, double>> lr_schedule{{0, 0.1}};
    std::uint64_t seed = 0;

    double lr_at(int epoch) const;
};

struct TrainResult {
    RandomizedNet net;
    std::vector<double> epoch_loss;
};

// Fresh net with the given hidden widths, weights drawn from (seed, layer).
RandomizedNet make_mlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                       double relu_slope, int noise_layer_index,
                       std::optional<NoiseModel> noise, std::uint64_t seed);

TrainResult train(const RandomizedNet& net, const Dataset& data, const TrainConfig& config);

void save_net(const RandomizedNet& net, const std::string& path);
RandomizedNet load_net(const std::string& path);

}  // namespace renoir

#endif
