#include "renoir/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "renoir/rng.hpp"

namespace renoir {

namespace {

int layer_output_dim(const Layer& layer, int current) {
    if (const auto* lin = std::get_if<LinearLayer>(&layer))
        return static_cast<int>(lin->W.rows());
    return current;
}

Eigen::VectorXd apply_layer(const Layer& layer, const Eigen::VectorXd& v) {
    if (const auto* lin = std::get_if<LinearLayer>(&layer)) return lin->W * v + lin->b;
    const double slope = std::get<LeakyReluLayer>(layer).slope;
    return v.unaryExpr([slope](double a) { return a >= 0.0 ? a : slope * a; });
}

// logsumexp-stable softmax cross-entropy; returns loss, fills probs.
double softmax_ce(const Eigen::VectorXd& logits, int y, Eigen::VectorXd& probs) {
    const double m = logits.maxCoeff();
    probs = (logits.array() - m).exp();
    const double z = probs.sum();
    probs /= z;
    return std::log(z) + m - logits(y);
}

Eigen::VectorXd pairwise_vec_sum(const std::vector<Eigen::VectorXd>& v, std::size_t lo,
                                 std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_vec_sum(v, lo, mid) + pairwise_vec_sum(v, mid, hi);
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd inputs, std::vector<int> labels, int num_classes)
    : inputs_(std::move(inputs)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (inputs_.rows() == 0) throw std::invalid_argument("dataset is empty");
    if (static_cast<std::int64_t>(labels_.size()) != inputs_.rows())
        throw std::invalid_argument("label count does not match input count");
    if (num_classes_ < 1) throw std::invalid_argument("num_classes must be >= 1");
    if (inputs_.minCoeff() < -1.0 || inputs_.maxCoeff() > 1.0)
        throw std::invalid_argument("inputs must lie in [-1,1]");
    for (int label : labels_)
        if (label < 0 || label >= num_classes_)
            throw std::invalid_argument("label out of range");
}

double Dataset::diameter(Norm n) const {
    double best = 0.0;
    for (std::int64_t i = 0; i < size(); ++i)
        for (std::int64_t j = i + 1; j < size(); ++j) {
            const Eigen::VectorXd d = (inputs_.row(i) - inputs_.row(j)).transpose();
            double val = 0.0;
            switch (n) {
                case Norm::L1: val = d.lpNorm<1>(); break;
                case Norm::L2: val = d.norm(); break;
                case Norm::Linf: val = d.lpNorm<Eigen::Infinity>(); break;
            }
            best = std::max(best, val);
        }
    return best;
}

RandomizedNet::RandomizedNet(std::vector<Layer> layers, int noise_layer_index,
                             std::optional<NoiseModel> noise, int num_classes)
    : layers_(std::move(layers)),
      noise_layer_index_(noise_layer_index),
      noise_(std::move(noise)),
      num_classes_(num_classes) {
    if (layers_.empty()) throw std::invalid_argument("net needs at least one layer");
    const auto* first = std::get_if<LinearLayer>(&layers_.front());
    if (first == nullptr) throw std::invalid_argument("the first layer must be linear");
    input_dim_ = static_cast<int>(first->W.cols());
    validate();
}

void RandomizedNet::validate() const {
    int dim = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (const auto* lin = std::get_if<LinearLayer>(&layers_[i])) {
            if (lin->W.cols() != dim)
                throw std::invalid_argument("layer " + std::to_string(i) + " expects dimension " +
                                            std::to_string(lin->W.cols()) + ", got " +
                                            std::to_string(dim));
            if (lin->b.size() != lin->W.rows())
                throw std::invalid_argument("layer " + std::to_string(i) + " bias size mismatch");
            dim = static_cast<int>(lin->W.rows());
        }
    }
    if (dim != num_classes_)
        throw std::invalid_argument("final layer emits " + std::to_string(dim) +
                                    " logits, expected " + std::to_string(num_classes_));
    if (!std::holds_alternative<LinearLayer>(layers_.back()))
        throw std::invalid_argument("the final layer must be linear");
    if (noise_layer_index_ < 0 || noise_layer_index_ > static_cast<int>(layers_.size()))
        throw std::invalid_argument("noise_layer_index out of range");
    if (noise_) {
        int at = input_dim_;
        for (int i = 0; i < noise_layer_index_; ++i) at = layer_output_dim(layers_[i], at);
        if (noise_->dim() != at)
            throw std::invalid_argument("noise dimension " + std::to_string(noise_->dim()) +
                                        " does not match layer width " + std::to_string(at));
    }
}

const NoiseModel& RandomizedNet::noise() const {
    if (!noise_) throw std::invalid_argument("net has no noise model");
    return *noise_;
}

std::span<const Layer> RandomizedNet::prefix_layers() const {
    return {layers_.data(), static_cast<std::size_t>(noise_layer_index_)};
}

Eigen::VectorXd RandomizedNet::forward_noisy(const Eigen::VectorXd& x, std::uint64_t seed) const {
    if (x.size() != input_dim_) throw std::invalid_argument("input dimension mismatch");
    Eigen::VectorXd v = x;
    for (int i = 0; i < static_cast<int>(layers_.size()); ++i) {
        if (noise_ && i == noise_layer_index_) v += noise_->sample_one(seed);
        v = apply_layer(layers_[i], v);
    }
    if (noise_ && noise_layer_index_ == static_cast<int>(layers_.size()))
        v += noise_->sample_one(seed);
    return v;
}

Eigen::VectorXd RandomizedNet::forward_deterministic(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim_) throw std::invalid_argument("input dimension mismatch");
    Eigen::VectorXd v = x;
    for (const Layer& layer : layers_) v = apply_layer(layer, v);
    return v;
}

int argmax_logits(const Eigen::VectorXd& logits) {
    int best = 0;
    for (int i = 1; i < logits.size(); ++i)
        if (logits(i) > logits(best)) best = i;
    return best;
}

DiscreteDistribution RandomizedNet::predict_distribution(const Eigen::VectorXd& x, int n_mc,
                                                         std::uint64_t seed) const {
    if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes_), 0);
    if (!noise_) {
        counts[static_cast<std::size_t>(argmax_logits(forward_deterministic(x)))] = n_mc;
        return DiscreteDistribution::from_counts(counts);
    }
    for (int t = 0; t < n_mc; ++t) {
        const Eigen::VectorXd logits = forward_noisy(x, rng::derive(seed, static_cast<std::uint64_t>(t)));
        ++counts[static_cast<std::size_t>(argmax_logits(logits))];
    }
    return DiscreteDistribution::from_counts(counts);
}

int RandomizedNet::predict_majority(const Eigen::VectorXd& x, int n_mc, std::uint64_t seed) const {
    const DiscreteDistribution d = predict_distribution(x, n_mc, seed);
    int best = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d[i] > d[best]) best = static_cast<int>(i);
    return best;
}

nlohmann::json RandomizedNet::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& layer : layers_) {
        if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
            std::vector<std::vector<double>> w(lin->W.rows(), std::vector<double>(lin->W.cols()));
            for (int r = 0; r < lin->W.rows(); ++r)
                for (int c = 0; c < lin->W.cols(); ++c) w[r][c] = lin->W(r, c);
            std::vector<double> b(lin->b.data(), lin->b.data() + lin->b.size());
            layers.push_back({{"kind", "linear"}, {"w", w}, {"b", b}});
        } else {
            layers.push_back({{"kind", "leaky_relu"},
                              {"slope", std::get<LeakyReluLayer>(layer).slope}});
        }
    }
    nlohmann::json j{{"layers", layers},
                     {"noise_layer_index", noise_layer_index_},
                     {"num_classes", num_classes_},
                     {"version", 1}};
    j["noise"] = noise_ ? noise_->to_json() : nlohmann::json("none");
    return j;
}

RandomizedNet RandomizedNet::from_json(const nlohmann::json& j) {
    const int version = j.at("version").get<int>();
    if (version != 1)
        throw std::invalid_argument("unsupported model version " + std::to_string(version));
    std::vector<Layer> layers;
    for (const auto& lj : j.at("layers")) {
        const std::string kind = lj.at("kind").get<std::string>();
        if (kind == "linear") {
            const auto w = lj.at("w").get<std::vector<std::vector<double>>>();
            const auto b = lj.at("b").get<std::vector<double>>();
            if (w.empty()) throw std::invalid_argument("linear layer has no rows");
            LinearLayer lin;
            lin.W.resize(static_cast<int>(w.size()), static_cast<int>(w[0].size()));
            for (std::size_t r = 0; r < w.size(); ++r) {
                if (w[r].size() != w[0].size())
                    throw std::invalid_argument("linear layer rows have uneven lengths");
                for (std::size_t c = 0; c < w[r].size(); ++c)
                    lin.W(static_cast<int>(r), static_cast<int>(c)) = w[r][c];
            }
            lin.b = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<int>(b.size()));
            layers.emplace_back(std::move(lin));
        } else if (kind == "leaky_relu") {
            layers.emplace_back(LeakyReluLayer{lj.at("slope").get<double>()});
        } else {
            throw std::invalid_argument("unknown layer kind '" + kind + "'");
        }
    }
    std::optional<NoiseModel> noise;
    const auto& nj = j.at("noise");
    if (!(nj.is_string() && nj.get<std::string>() == "none"))
        noise = NoiseModel::from_json(nj);
    return RandomizedNet(std::move(layers), j.at("noise_layer_index").get<int>(), std::move(noise),
                         j.at("num_classes").get<int>());
}

namespace {

struct ForwardTrace {
    // value entering each layer (post-noise where applicable), plus logits.
    std::vector<Eigen::VectorXd> inputs;
    Eigen::VectorXd logits;
};

ForwardTrace traced_forward(const RandomizedNet& net, const Eigen::VectorXd& x,
                            std::uint64_t seed) {
    ForwardTrace trace;
    trace.inputs.reserve(net.layers().size());
    Eigen::VectorXd v = x;
    const int n = static_cast<int>(net.layers().size());
    for (int i = 0; i < n; ++i) {
        if (net.has_noise() && i == net.noise_layer_index()) v += net.noise().sample_one(seed);
        trace.inputs.push_back(v);
        v = apply_layer(net.layers()[i], v);
    }
    if (net.has_noise() && net.noise_layer_index() == n) v += net.noise().sample_one(seed);
    trace.logits = v;
    return trace;
}

// Backpropagates d(loss)/d(logits) through the trace; accumulates weight
// gradients when grads != nullptr and always returns the input gradient.
Eigen::VectorXd backward(const RandomizedNet& net, const ForwardTrace& trace,
                         Eigen::VectorXd delta, NetGradients* grads) {
    for (int i = static_cast<int>(net.layers().size()) - 1; i >= 0; --i) {
        const Layer& layer = net.layers()[static_cast<std::size_t>(i)];
        const Eigen::VectorXd& in = trace.inputs[static_cast<std::size_t>(i)];
        if (const auto* lin = std::get_if<LinearLayer>(&layer)) {
            if (grads) {
                grads->dW[static_cast<std::size_t>(i)] += delta * in.transpose();
                grads->db[static_cast<std::size_t>(i)] += delta;
            }
            delta = lin->W.transpose() * delta;
        } else {
            const double slope = std::get<LeakyReluLayer>(layer).slope;
            for (int k = 0; k < delta.size(); ++k)
                if (in(k) < 0.0) delta(k) *= slope;
        }
    }
    return delta;
}

NetGradients zero_gradients(const RandomizedNet& net) {
    NetGradients g;
    g.dW.resize(net.layers().size());
    g.db.resize(net.layers().size());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        if (const auto* lin = std::get_if<LinearLayer>(&net.layers()[i])) {
            g.dW[i] = Eigen::MatrixXd::Zero(lin->W.rows(), lin->W.cols());
            g.db[i] = Eigen::VectorXd::Zero(lin->b.size());
        }
    }
    g.dx = Eigen::VectorXd::Zero(net.input_dim());
    return g;
}

// Flattens one example's gradient so batch reduction can run pairwise.
Eigen::VectorXd flatten(const NetGradients& g) {
    std::int64_t total = g.dx.size();
    for (const auto& m : g.dW) total += m.size();
    for (const auto& v : g.db) total += v.size();
    Eigen::VectorXd flat(total);
    std::int64_t at = 0;
    for (const auto& m : g.dW) {
        flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    }
    for (const auto& v : g.db) {
        flat.segment(at, v.size()) = v;
        at += v.size();
    }
    flat.segment(at, g.dx.size()) = g.dx;
    return flat;
}

void unflatten(const Eigen::VectorXd& flat, NetGradients& g) {
    std::int64_t at = 0;
    for (auto& m : g.dW) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
        at += m.size();
    }
    for (auto& v : g.db) {
        v = flat.segment(at, v.size());
        at += v.size();
    }
    g.dx = flat.segment(at, g.dx.size());
}

}  // namespace

double loss_and_grad(const RandomizedNet& net, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::span<const std::uint64_t> seeds,
                     NetGradients* grads) {
    const std::int64_t n = X.rows();
    if (n == 0) throw std::invalid_argument("empty batch");
    if (static_cast<std::int64_t>(y.size()) != n || static_cast<std::int64_t>(seeds.size()) != n)
        throw std::invalid_argument("batch size mismatch between inputs, labels and seeds");

    std::vector<double> losses(static_cast<std::size_t>(n));
    std::vector<Eigen::VectorXd> flats;
    if (grads) flats.resize(static_cast<std::size_t>(n));

    parallel_for(n, [&](std::int64_t j) {
        const ForwardTrace trace = traced_forward(net, X.row(j).transpose(), seeds[j]);
        Eigen::VectorXd probs;
        losses[static_cast<std::size_t>(j)] = softmax_ce(trace.logits, y[static_cast<std::size_t>(j)], probs);
        if (grads) {
            Eigen::VectorXd delta = probs;
            delta(y[static_cast<std::size_t>(j)]) -= 1.0;
            NetGradients g = zero_gradients(net);
            g.dx = backward(net, trace, std::move(delta), &g);
            flats[static_cast<std::size_t>(j)] = flatten(g);
        }
    });

    if (grads) {
        *grads = zero_gradients(net);
        const Eigen::VectorXd mean =
            pairwise_vec_sum(flats, 0, flats.size()) / static_cast<double>(n);
        unflatten(mean, *grads);
    }
    return pairwise_mean(losses);
}

double loss_and_grad(const RandomizedNet& net, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, std::uint64_t seed, NetGradients* grads) {
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(X.rows()));
    for (std::size_t j = 0; j < seeds.size(); ++j) seeds[j] = rng::derive(seed, j);
    return loss_and_grad(net, X, y, seeds, grads);
}

Eigen::VectorXd input_gradient(const RandomizedNet& net, const Eigen::VectorXd& x, int y,
                               std::uint64_t seed) {
    const ForwardTrace trace = traced_forward(net, x, seed);
    Eigen::VectorXd probs;
    softmax_ce(trace.logits, y, probs);
    Eigen::VectorXd delta = probs;
    delta(y) -= 1.0;
    return backward(net, trace, std::move(delta), nullptr);
}

Eigen::VectorXd input_gradient_for_delta(const RandomizedNet& net, const Eigen::VectorXd& x,
                                         const Eigen::VectorXd& logit_delta, std::uint64_t seed) {
    if (logit_delta.size() != net.num_classes())
        throw std::invalid_argument("logit gradient dimension mismatch");
    const ForwardTrace trace = traced_forward(net, x, seed);
    return backward(net, trace, logit_delta, nullptr);
}

Eigen::VectorXd pairwise_vector_sum(const std::vector<Eigen::VectorXd>& v) {
    if (v.empty()) throw std::invalid_argument("sum of empty vector list");
    return pairwise_vec_sum(v, 0, v.size());
}

double TrainConfig::lr_at(int epoch) const {
    if (lr_schedule.empty()) throw std::invalid_argument("empty learning-rate schedule");
    double lr = lr_schedule.front().second;
    for (const auto& [start, rate] : lr_schedule)
        if (epoch >= start) lr = rate;
    return lr;
}

RandomizedNet make_mlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                       double relu_slope, int noise_layer_index,
                       std::optional<NoiseModel> noise, std::uint64_t seed) {
    std::vector<Layer> layers;
    int in = input_dim;
    int linear_index = 0;
    const std::uint64_t base = rng::derive(seed, rng::kWeightInit);
    auto make_linear = [&](int out) {
        rng::Stream stream(base, static_cast<std::uint64_t>(linear_index++));
        LinearLayer lin;
        lin.W.resize(out, in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) lin.W(r, c) = scale * (2.0 * stream.next_double() - 1.0);
        lin.b = Eigen::VectorXd::Zero(out);
        in = out;
        return lin;
    };
    for (int width : hidden) {
        layers.emplace_back(make_linear(width));
        layers.emplace_back(LeakyReluLayer{relu_slope});
    }
    layers.emplace_back(make_linear(num_classes));
    return RandomizedNet(std::move(layers), noise_layer_index, std::move(noise), num_classes);
}

TrainResult train(const RandomizedNet& net, const Dataset& data, const TrainConfig& config) {
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

    TrainResult result{net, {}};
    RandomizedNet& model = result.net;

    NetGradients velocity = [&] {
        NetGradients v;
        v.dW.resize(model.layers().size());
        v.db.resize(model.layers().size());
        for (std::size_t i = 0; i < model.layers().size(); ++i)
            if (const auto* lin = std::get_if<LinearLayer>(&model.layers()[i])) {
                v.dW[i] = Eigen::MatrixXd::Zero(lin->W.rows(), lin->W.cols());
                v.db[i] = Eigen::VectorXd::Zero(lin->b.size());
            }
        return v;
    }();

    const std::int64_t n = data.size();
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng::Stream shuffle(rng::derive(config.seed, rng::kTrainShuffle),
                            static_cast<std::uint64_t>(epoch));
        for (std::int64_t i = n - 1; i > 0; --i) {
            const std::int64_t k =
                static_cast<std::int64_t>(shuffle.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(k)]);
        }
        const std::uint64_t noise_base =
            rng::derive(rng::derive(config.seed, rng::kTrainNoise), static_cast<std::uint64_t>(epoch));
        const double lr = config.lr_at(epoch);

        std::vector<double> batch_losses;
        for (std::int64_t start = 0; start < n; start += config.batch_size) {
            const std::int64_t count = std::min<std::int64_t>(config.batch_size, n - start);
            Eigen::MatrixXd X(count, data.dim());
            std::vector<int> y(static_cast<std::size_t>(count));
            std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
            for (std::int64_t j = 0; j < count; ++j) {
                const std::int64_t idx = order[static_cast<std::size_t>(start + j)];
                X.row(j) = data.inputs().row(idx);
                y[static_cast<std::size_t>(j)] = data.label(idx);
                seeds[static_cast<std::size_t>(j)] =
                    rng::derive(noise_base, static_cast<std::uint64_t>(start + j));
            }
            NetGradients grads;
            batch_losses.push_back(loss_and_grad(model, X, y, seeds, &grads));
            for (std::size_t i = 0; i < model.mutable_layers().size(); ++i) {
                auto* lin = std::get_if<LinearLayer>(&model.mutable_layers()[i]);
                if (lin == nullptr) continue;
                velocity.dW[i] = config.momentum * velocity.dW[i] + grads.dW[i];
                velocity.db[i] = config.momentum * velocity.db[i] + grads.db[i];
                lin->W -= lr * velocity.dW[i];
                lin->b -= lr * velocity.db[i];
            }
        }
        result.epoch_loss.push_back(pairwise_mean(batch_losses));
    }
    return result;
}

void save_net(const RandomizedNet& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    out << net.to_json().dump(2) << '\n';
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

RandomizedNet load_net(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("malformed model file '" + path + "': " + e.what());
    }
    return RandomizedNet::from_json(j);
}

}  // namespace renoir
