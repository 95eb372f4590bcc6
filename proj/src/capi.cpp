#include "renoir.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "renoir/attacks.hpp"
#include "renoir/certify.hpp"
#include "renoir/data.hpp"
#include "renoir/distributions.hpp"
#include "renoir/divergences.hpp"
#include "renoir/net.hpp"
#include "renoir/riskbounds.hpp"

using nlohmann::json;

struct rr_noise_s {
    renoir::NoiseModel model;
};
struct rr_dataset_s {
    renoir::Dataset data;
};
struct rr_net_s {
    renoir::RandomizedNet net;
};

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

// Funnels C++ exceptions into status codes; json parse problems map to
// RR_ERR_PARSE so callers can distinguish bad files from bad values.
template <typename Fn>
rr_status guarded(Fn&& fn) {
    try {
        fn();
        return RR_OK;
    } catch (const json::parse_error& e) {
        set_error(e.what());
        return RR_ERR_PARSE;
    } catch (const json::exception& e) {
        set_error(e.what());
        return RR_ERR_INVALID;
    } catch (const renoir::NumericError& e) {
        set_error(e.what());
        return RR_ERR_NUMERIC;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return RR_ERR_INVALID;
    } catch (const std::exception& e) {
        set_error(e.what());
        return RR_ERR_NUMERIC;
    }
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

renoir::DiscreteDistribution make_dist(const double* p, int k) {
    require(p != nullptr && k >= 1, "null or empty probability vector");
    return renoir::DiscreteDistribution(std::vector<double>(p, p + k));
}

}  // namespace

extern "C" {

const char* rr_version(void) { return "1.0.0"; }

const char* rr_last_error(void) { return t_last_error.c_str(); }

void rr_string_free(char* s) { delete[] s; }

void rr_set_max_threads(int n) { renoir::set_max_threads(n); }

/* ---- noise ------------------------------------------------------------- */

rr_status rr_noise_from_json(const char* spec_json, rr_noise** out) {
    return guarded([&] {
        require(spec_json != nullptr && out != nullptr, "null argument");
        *out = new rr_noise_s{renoir::NoiseModel::from_json(json::parse(spec_json))};
    });
}

rr_status rr_noise_to_json(const rr_noise* noise, char** json_out) {
    return guarded([&] {
        require(noise != nullptr && json_out != nullptr, "null argument");
        *json_out = copy_string(noise->model.to_json().dump());
    });
}

void rr_noise_free(rr_noise* noise) { delete noise; }

int rr_noise_dim(const rr_noise* noise) { return noise ? noise->model.dim() : 0; }

rr_status rr_noise_sample(const rr_noise* noise, int n, uint64_t seed, double* out) {
    return guarded([&] {
        require(noise != nullptr && out != nullptr, "null argument");
        const Eigen::MatrixXd draws = noise->model.sample(n, seed);
        for (int i = 0; i < draws.rows(); ++i)
            for (int j = 0; j < draws.cols(); ++j) out[i * draws.cols() + j] = draws(i, j);
    });
}

rr_status rr_noise_log_density(const rr_noise* noise, const double* z, int dim, double* out) {
    return guarded([&] {
        require(noise != nullptr && z != nullptr && out != nullptr, "null argument");
        *out = noise->model.log_density(Eigen::Map<const Eigen::VectorXd>(z, dim));
    });
}

/* ---- divergences ------------------------------------------------------- */

rr_status rr_renyi_discrete(const double* p, const double* q, int k, double lambda, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = renoir::renyi_discrete(make_dist(p, k), make_dist(q, k), lambda);
    });
}

rr_status rr_tv_discrete(const double* p, const double* q, int k, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = renoir::tv_discrete(make_dist(p, k), make_dist(q, k));
    });
}

rr_status rr_shannon_entropy(const double* p, int k, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = renoir::shannon_entropy(make_dist(p, k));
    });
}

rr_status rr_collision_entropy(const double* p, int k, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = renoir::collision_entropy(make_dist(p, k));
    });
}

rr_status rr_renyi_gaussian_shift(const double* m1, const double* m2, const double* cov, int d,
                                  double lambda, double* out) {
    return guarded([&] {
        require(m1 != nullptr && m2 != nullptr && cov != nullptr && out != nullptr, "null argument");
        Eigen::MatrixXd sigma(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) sigma(i, j) = cov[i * d + j];
        *out = renoir::renyi_gaussian_shift(Eigen::Map<const Eigen::VectorXd>(m1, d),
                                            Eigen::Map<const Eigen::VectorXd>(m2, d), sigma, lambda);
    });
}

rr_status rr_renyi_to_tv(double eps, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = renoir::renyi_to_tv(eps);
    });
}

rr_status rr_renyi_ladder(double eps, int lambda_is_inf, double diam, double* hellinger,
                          double* prokhorov, double* discrepancy, double* wasserstein,
                          double* separation) {
    return guarded([&] {
        const renoir::LadderBounds b = renoir::renyi_to_ladder(eps, lambda_is_inf != 0, diam);
        if (hellinger) *hellinger = b.hellinger;
        if (prokhorov) *prokhorov = b.prokhorov;
        if (discrepancy) *discrepancy = b.discrepancy;
        if (wasserstein) *wasserstein = b.wasserstein;
        if (separation)
            *separation = b.separation ? *b.separation : std::numeric_limits<double>::quiet_NaN();
    });
}

/* ---- datasets ---------------------------------------------------------- */

rr_status rr_dataset_from_json(const char* spec_json, rr_dataset** out) {
    return guarded([&] {
        require(spec_json != nullptr && out != nullptr, "null argument");
        *out = new rr_dataset_s{renoir::dataset_from_json(json::parse(spec_json))};
    });
}

rr_status rr_dataset_load_csv(const char* path, rr_dataset** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new rr_dataset_s{renoir::load_csv(path)};
    });
}

rr_status rr_dataset_save_csv(const rr_dataset* data, const char* path) {
    return guarded([&] {
        require(data != nullptr && path != nullptr, "null argument");
        renoir::save_csv(data->data, path);
    });
}

void rr_dataset_free(rr_dataset* data) { delete data; }

int64_t rr_dataset_size(const rr_dataset* data) { return data ? data->data.size() : 0; }

int rr_dataset_dim(const rr_dataset* data) { return data ? data->data.dim() : 0; }

int rr_dataset_classes(const rr_dataset* data) { return data ? data->data.num_classes() : 0; }

rr_status rr_dataset_diameter(const rr_dataset* data, const char* norm, double* out) {
    return guarded([&] {
        require(data != nullptr && norm != nullptr && out != nullptr, "null argument");
        *out = data->data.diameter(renoir::norm_from_name(norm));
    });
}

/* ---- nets -------------------------------------------------------------- */

rr_status rr_net_load(const char* path, rr_net** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new rr_net_s{renoir::load_net(path)};
    });
}

rr_status rr_net_to_json(const rr_net* net, char** json_out) {
    return guarded([&] {
        require(net != nullptr && json_out != nullptr, "null argument");
        *json_out = copy_string(net->net.to_json().dump(2));
    });
}

void rr_net_free(rr_net* net) { delete net; }

int rr_net_input_dim(const rr_net* net) { return net ? net->net.input_dim() : 0; }

int rr_net_classes(const rr_net* net) { return net ? net->net.num_classes() : 0; }

int rr_net_has_noise(const rr_net* net) { return net && net->net.has_noise() ? 1 : 0; }

rr_status rr_net_train(const char* config_json, const rr_dataset* data, rr_net** out,
                       char** loss_csv_out) {
    return guarded([&] {
        require(config_json != nullptr && data != nullptr && out != nullptr, "null argument");
        const json config = json::parse(config_json);

        const json model = config.value("model", json({{"hidden", {16, 16}}}));
        const std::vector<int> hidden = model.value("hidden", std::vector<int>{16, 16});
        const double slope = model.value("activation_slope", 0.1);

        std::optional<renoir::NoiseModel> noise;
        if (config.contains("noise") && !(config.at("noise").is_string() &&
                                          config.at("noise").get<std::string>() == "none"))
            noise = renoir::NoiseModel::from_json(config.at("noise"));
        const int noise_layer_index = config.value("noise_layer_index", 0);

        if (!config.contains("seed"))
            throw std::invalid_argument("config field 'seed' is required");
        const auto seed = config.at("seed").get<std::uint64_t>();

        renoir::TrainConfig tc;
        tc.seed = seed;
        if (config.contains("train")) {
            const json& tj = config.at("train");
            tc.epochs = tj.value("epochs", tc.epochs);
            tc.batch_size = tj.value("batch_size", tc.batch_size);
            tc.momentum = tj.value("momentum", tc.momentum);
            if (tj.contains("lr_schedule")) {
                tc.lr_schedule.clear();
                for (const auto& knot : tj.at("lr_schedule"))
                    tc.lr_schedule.emplace_back(knot.at(0).get<int>(), knot.at(1).get<double>());
            }
        }

        renoir::RandomizedNet net = renoir::make_mlp(data->data.dim(), hidden,
                                                     data->data.num_classes(), slope,
                                                     noise_layer_index, std::move(noise), seed);
        renoir::TrainResult result = renoir::train(net, data->data, tc);

        if (loss_csv_out) {
            std::string csv = "epoch,mean_loss\n";
            for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
                csv += std::to_string(e) + "," + renoir::format_g9(result.epoch_loss[e]) + "\n";
            *loss_csv_out = copy_string(csv);
        }
        *out = new rr_net_s{std::move(result.net)};
    });
}

rr_status rr_net_predict_distribution(const rr_net* net, const double* x, int dim, int n_mc,
                                      uint64_t seed, double* probs_out) {
    return guarded([&] {
        require(net != nullptr && x != nullptr && probs_out != nullptr, "null argument");
        const renoir::DiscreteDistribution law = net->net.predict_distribution(
            Eigen::Map<const Eigen::VectorXd>(x, dim), n_mc, seed);
        for (std::size_t i = 0; i < law.size(); ++i) probs_out[i] = law[i];
    });
}

/* ---- certification, attacks, curves ------------------------------------ */

rr_status rr_certify(const rr_net* net, double alpha, double lambda, const char* metric,
                     double diam, char** cert_json_out) {
    return guarded([&] {
        require(net != nullptr && metric != nullptr && cert_json_out != nullptr, "null argument");
        if (!net->net.has_noise())
            throw std::invalid_argument("certificate requires a noise model");
        const renoir::NoiseModel& noise = net->net.noise();
        const renoir::Norm noise_norm =
            noise.family() == renoir::NoiseFamily::Gaussian ? renoir::Norm::L2 : renoir::Norm::L1;

        renoir::Sensitivity delta;
        if (net->net.noise_layer_index() == 0) {
            delta = renoir::Sensitivity{alpha, noise_norm, noise_norm, alpha,
                                        renoir::SensitivityMethod::ExactLinear};
        } else {
            delta = renoir::sensitivity_lipschitz(net->net.prefix_layers(), alpha, noise_norm);
        }
        renoir::RobustnessCertificate cert = renoir::certificate(noise, delta, lambda);
        const renoir::MetricKind target = renoir::metric_from_name(metric);
        if (target != renoir::MetricKind::Renyi)
            cert = renoir::convert_certificate(cert, target, diam);
        *cert_json_out = copy_string(cert.to_json().dump(2));
    });
}

rr_status rr_attack_report(const rr_net* net, const rr_dataset* data, const char* attack_spec_json,
                           double lambda, int n_mc, uint64_t seed, char** report_json_out) {
    return guarded([&] {
        require(net != nullptr && data != nullptr && attack_spec_json != nullptr &&
                    report_json_out != nullptr,
                "null argument");
        const renoir::AttackSpec spec = renoir::AttackSpec::from_json(json::parse(attack_spec_json));
        const renoir::RiskReport report =
            renoir::risk_report(net->net, data->data, spec, lambda, n_mc, seed);
        *report_json_out = copy_string(report.to_json().dump(2));
    });
}

rr_status rr_curve(const rr_net* net, const rr_dataset* data, const double* alphas, int n_alphas,
                   double lambda, int n_mc, uint64_t seed, char** csv_out) {
    return guarded([&] {
        require(net != nullptr && data != nullptr && alphas != nullptr && csv_out != nullptr,
                "null argument");
        const std::vector<double> grid(alphas, alphas + n_alphas);
        const auto rows =
            renoir::guaranteed_accuracy_curve(net->net, data->data, grid, lambda, n_mc, seed);
        *csv_out = copy_string(renoir::curve_to_csv(rows));
    });
}

}  // extern "C"
