// Command-line frontend. Talks to the core exclusively through the C API in
// renoir.h; JSON here is only for assembling configs and stamping artifacts.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "renoir.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw CliError{code, message}; }

void check(rr_status status, const std::string& context) {
    if (status == RR_OK) return;
    const int code = status == RR_ERR_NUMERIC ? kExitNumeric : kExitConfig;
    fail(code, context + ": " + rr_last_error());
}

// FNV-1a over the canonical request; stamped into every artifact.
std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json meta_for(const std::string& canonical_config, std::uint64_t seed) {
    return {{"config_hash", fnv1a_hex(canonical_config)}, {"seed", seed}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitConfig, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(kExitConfig, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) fail(kExitConfig, "write to '" + path + "' failed");
}

std::string take_string(char* owned) {
    std::string s(owned ? owned : "");
    rr_string_free(owned);
    return s;
}

std::vector<double> parse_grid(const std::string& spec) {
    double start = 0.0, end = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &end, &step) != 3)
        fail(kExitConfig, "field 'alpha-grid' must look like start:end:step, got '" + spec + "'");
    if (!(step > 0.0) || end < start)
        fail(kExitConfig, "field 'alpha-grid' needs step > 0 and end >= start");
    std::vector<double> grid;
    for (int k = 0;; ++k) {
        const double v = start + k * step;
        if (v > end + 1e-12) break;
        grid.push_back(v);
    }
    return grid;
}

std::vector<double> parse_probs(const std::string& csv, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            fail(kExitConfig, std::string("field '") + flag + "' has a non-numeric entry '" + cell + "'");
        }
    }
    if (out.empty()) fail(kExitConfig, std::string("field '") + flag + "' is empty");
    return out;
}

double parse_lambda(const std::string& s) {
    if (s == "inf" || s == "infinity") return INFINITY;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        fail(kExitConfig, "field 'lambda' must be a number >= 1 or 'inf', got '" + s + "'");
    }
}

struct NetHandle {
    rr_net* net = nullptr;
    ~NetHandle() { rr_net_free(net); }
};

struct DatasetHandle {
    rr_dataset* data = nullptr;
    ~DatasetHandle() { rr_dataset_free(data); }
};

void load_model(const std::string& path, NetHandle& handle) {
    check(rr_net_load(path.c_str(), &handle.net), "loading model '" + path + "'");
}

void load_data(const std::string& path, DatasetHandle& handle) {
    check(rr_dataset_load_csv(path.c_str(), &handle.data), "loading dataset '" + path + "'");
}

std::string loss_csv_path(const std::string& model_path) {
    const std::string suffix = ".json";
    if (model_path.size() > suffix.size() &&
        model_path.compare(model_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return model_path.substr(0, model_path.size() - suffix.size()) + ".loss.csv";
    return model_path + ".loss.csv";
}

int run_train(const std::string& config_path, const std::string& out_path) {
    const std::string config_text = read_file(config_path);
    json config;
    try {
        config = json::parse(config_text);
    } catch (const json::parse_error& e) {
        fail(kExitConfig, "config '" + config_path + "' is not valid JSON: " + e.what());
    }
    if (!config.contains("seed")) fail(kExitConfig, "config field 'seed' is required");
    if (!config.contains("dataset")) fail(kExitConfig, "config field 'dataset' is required");
    const auto seed = config.at("seed").get<std::uint64_t>();

    DatasetHandle data;
    check(rr_dataset_from_json(config.at("dataset").dump().c_str(), &data.data),
          "building dataset");

    NetHandle net;
    char* loss_csv = nullptr;
    check(rr_net_train(config.dump().c_str(), data.data, &net.net, &loss_csv), "training");
    const std::string loss_trace = take_string(loss_csv);

    char* model_json = nullptr;
    check(rr_net_to_json(net.net, &model_json), "serializing model");
    json model = json::parse(take_string(model_json));
    const json meta = meta_for(config.dump(), seed);
    model["meta"] = meta;
    write_file(out_path, model.dump(2) + "\n");

    const std::string loss_path = loss_csv_path(out_path);
    write_file(loss_path, loss_trace);
    write_file(loss_path + ".meta.json", meta.dump(2) + "\n");
    return 0;
}

int run_certify(const std::string& model_path, double alpha, const std::string& lambda_text,
                const std::string& metric, double diam, const std::string& out_path) {
    const double lambda = parse_lambda(lambda_text);
    NetHandle net;
    load_model(model_path, net);
    char* cert_cstr = nullptr;
    check(rr_certify(net.net, alpha, lambda, metric.c_str(), diam, &cert_cstr), "certify");
    json cert = json::parse(take_string(cert_cstr));
    const std::string canonical = model_path + "|alpha=" + std::to_string(alpha) +
                                  "|lambda=" + lambda_text + "|metric=" + metric +
                                  "|diam=" + std::to_string(diam);
    cert["meta"] = meta_for(canonical, 0);
    const std::string text = cert.dump(2) + "\n";
    if (!out_path.empty())
        write_file(out_path, text);
    else
        std::cout << text;
    return 0;
}

json attack_spec_json(const std::string& kind, const std::string& norm, double alpha, int steps,
                      double step_size, int eot, std::uint64_t seed, double kappa, double c_lo,
                      double c_hi, int binary_steps, double lr, double c1, double c2,
                      int grid_resolution, int grid_eval_mc, bool no_random_start,
                      const std::string& eot_mode) {
    json spec{{"kind", kind},        {"alpha", alpha},
              {"steps", steps},      {"eot_samples", eot},
              {"seed", seed},        {"kappa", kappa},
              {"c_lo", c_lo},        {"c_hi", c_hi},
              {"binary_steps", binary_steps},
              {"learning_rate", lr}, {"c1", c1},
              {"c2", c2},            {"grid_resolution", grid_resolution},
              {"grid_eval_mc", grid_eval_mc},
              {"eot_mode", eot_mode}};
    if (step_size > 0.0) spec["step_size"] = step_size;
    if (!norm.empty()) spec["norm"] = norm;
    if (no_random_start) spec["random_start"] = false;
    return spec;
}

int run_attack(const std::string& model_path, const std::string& data_path, const json& spec,
               const std::string& lambda_text, int n_mc, std::uint64_t seed,
               const std::string& out_path) {
    const double lambda = parse_lambda(lambda_text);
    NetHandle net;
    load_model(model_path, net);
    DatasetHandle data;
    load_data(data_path, data);

    char* report_cstr = nullptr;
    check(rr_attack_report(net.net, data.data, spec.dump().c_str(), lambda, n_mc, seed,
                           &report_cstr),
          "attack");
    json report = json::parse(take_string(report_cstr));
    report["meta"] = meta_for(model_path + "|" + data_path + "|" + spec.dump() +
                                  "|lambda=" + lambda_text + "|mc=" + std::to_string(n_mc),
                              seed);
    const std::string text = report.dump(2) + "\n";
    if (!out_path.empty())
        write_file(out_path, text);
    else
        std::cout << text;
    return 0;
}

int run_curve(const std::string& model_path, const std::string& data_path,
              const std::string& grid_spec, const std::string& lambda_text, int n_mc,
              std::uint64_t seed, const std::string& out_path) {
    const double lambda = parse_lambda(lambda_text);
    const std::vector<double> grid = parse_grid(grid_spec);
    NetHandle net;
    load_model(model_path, net);
    DatasetHandle data;
    load_data(data_path, data);

    char* csv_cstr = nullptr;
    check(rr_curve(net.net, data.data, grid.data(), static_cast<int>(grid.size()), lambda, n_mc,
                   seed, &csv_cstr),
          "curve");
    const std::string csv = take_string(csv_cstr);
    if (!out_path.empty()) {
        write_file(out_path, csv);
        const json meta = meta_for(model_path + "|" + data_path + "|grid=" + grid_spec +
                                       "|lambda=" + lambda_text + "|mc=" + std::to_string(n_mc),
                                   seed);
        write_file(out_path + ".meta.json", meta.dump(2) + "\n");
    } else {
        std::cout << csv;
    }
    return 0;
}

int run_divergence(const std::string& p_text, const std::string& q_text,
                   const std::string& lambda_text) {
    const std::vector<double> p = parse_probs(p_text, "p");
    const std::vector<double> q = parse_probs(q_text, "q");
    if (p.size() != q.size()) fail(kExitConfig, "fields 'p' and 'q' must have the same length");
    const double lambda = parse_lambda(lambda_text);
    double value = 0.0;
    check(rr_renyi_discrete(p.data(), q.data(), static_cast<int>(p.size()), lambda, &value),
          "divergence");
    if (std::isinf(value))
        std::cout << "inf\n";
    else
        std::printf("%.6f\n", value);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robustness certificates, risk bounds and attacks for noise-injected classifiers"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker cap (fallback: RENOIR_THREADS, default 1)");

    // train
    auto* train = app.add_subcommand("train", "train a model from a JSON experiment config");
    std::string train_config, train_out;
    train->add_option("--config", train_config, "config JSON path")->required();
    train->add_option("--out", train_out, "output model JSON path")->required();

    // certify
    auto* certify = app.add_subcommand("certify", "emit a robustness certificate for a model");
    std::string cert_model, cert_lambda = "1", cert_metric = "renyi", cert_out;
    double cert_alpha = 0.0, cert_diam = 1.0;
    certify->add_option("--model", cert_model, "model JSON path")->required();
    certify->add_option("--alpha", cert_alpha, "perturbation budget")->required();
    certify->add_option("--lambda", cert_lambda, "divergence order (number or 'inf')");
    certify->add_option("--metric", cert_metric,
                        "renyi|tv|hellinger|prokhorov|discrepancy|wasserstein|separation");
    certify->add_option("--diam", cert_diam, "output-space diameter for the wasserstein bound");
    certify->add_option("--out", cert_out, "write certificate here instead of stdout");

    // attack
    auto* attack = app.add_subcommand("attack", "run an attack and report risks and gap bounds");
    std::string atk_model, atk_data, atk_kind = "pgd", atk_norm, atk_lambda = "1", atk_out;
    std::string atk_eot_mode = "loss";
    double atk_alpha = 0.06, atk_step = 0.0, atk_kappa = 0.0, atk_clo = 1e-3, atk_chi = 10.0;
    double atk_lr = 0.05, atk_c1 = 1e-2, atk_c2 = 1.0;
    int atk_steps = 20, atk_eot = 80, atk_mc = 1000, atk_bsteps = 6, atk_res = 11, atk_grid_mc = 100;
    std::uint64_t atk_seed = 0;
    bool atk_no_random_start = false;
    attack->add_option("--model", atk_model, "model JSON path")->required();
    attack->add_option("--data", atk_data, "dataset CSV path")->required();
    attack->add_option("--attack", atk_kind, "pgd|cw|ead|grid");
    attack->add_option("--norm", atk_norm, "override the attack norm");
    attack->add_option("--alpha", atk_alpha, "budget (pgd, grid)");
    attack->add_option("--steps", atk_steps, "iteration count");
    attack->add_option("--step-size", atk_step, "pgd step (default alpha/4)");
    attack->add_option("--eot", atk_eot, "noise draws per gradient");
    attack->add_option("--eot-mode", atk_eot_mode, "loss|logits gradient averaging");
    attack->add_option("--seed", atk_seed, "master seed")->required();
    attack->add_option("--lambda", atk_lambda, "certificate order for the gap bound");
    attack->add_option("--mc", atk_mc, "risk-evaluation draws per input");
    attack->add_option("--kappa", atk_kappa, "cw/ead confidence");
    attack->add_option("--c-lo", atk_clo, "cw binary-search lower c");
    attack->add_option("--c-hi", atk_chi, "cw binary-search upper c");
    attack->add_option("--binary-steps", atk_bsteps, "cw binary-search steps");
    attack->add_option("--lr", atk_lr, "cw/ead learner rate");
    attack->add_option("--c1", atk_c1, "ead l1 weight");
    attack->add_option("--c2", atk_c2, "ead l2 weight");
    attack->add_option("--grid-resolution", atk_res, "grid points per axis");
    attack->add_option("--grid-mc", atk_grid_mc, "grid scoring draws per candidate");
    attack->add_flag("--no-random-start", atk_no_random_start, "start pgd at the input itself");
    attack->add_option("--out", atk_out, "write the report here instead of stdout");

    // curve
    auto* curve = app.add_subcommand("curve", "guaranteed-accuracy curve over a budget grid");
    std::string cur_model, cur_data, cur_grid, cur_lambda = "1", cur_out;
    int cur_mc = 10000;
    std::uint64_t cur_seed = 0;
    curve->add_option("--model", cur_model, "model JSON path")->required();
    curve->add_option("--data", cur_data, "dataset CSV path")->required();
    curve->add_option("--alpha-grid", cur_grid, "start:end:step")->required();
    curve->add_option("--lambda", cur_lambda, "certificate order");
    curve->add_option("--mc", cur_mc, "draws per input");
    curve->add_option("--seed", cur_seed, "master seed")->required();
    curve->add_option("--out", cur_out, "write the CSV here instead of stdout");

    // divergence
    auto* divergence = app.add_subcommand("divergence", "order-lambda divergence of two discrete laws");
    std::string div_p, div_q, div_lambda = "1";
    divergence->add_option("--p", div_p, "comma-separated probabilities")->required();
    divergence->add_option("--q", div_q, "comma-separated probabilities")->required();
    divergence->add_option("--lambda", div_lambda, "order (number or 'inf')");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (threads <= 0) {
        if (const char* env = std::getenv("RENOIR_THREADS")) threads = std::atoi(env);
    }
    rr_set_max_threads(threads > 0 ? threads : 1);

    try {
        if (*train) return run_train(train_config, train_out);
        if (*certify) return run_certify(cert_model, cert_alpha, cert_lambda, cert_metric,
                                         cert_diam, cert_out);
        if (*attack) {
            const json spec = attack_spec_json(atk_kind, atk_norm, atk_alpha, atk_steps, atk_step,
                                               atk_eot, atk_seed, atk_kappa, atk_clo, atk_chi,
                                               atk_bsteps, atk_lr, atk_c1, atk_c2, atk_res,
                                               atk_grid_mc, atk_no_random_start, atk_eot_mode);
            return run_attack(atk_model, atk_data, spec, atk_lambda, atk_mc, atk_seed, atk_out);
        }
        if (*curve) return run_curve(cur_model, cur_data, cur_grid, cur_lambda, cur_mc, cur_seed,
                                     cur_out);
        if (*divergence) return run_divergence(div_p, div_q, div_lambda);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
