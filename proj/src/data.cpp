#include "renoir/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "renoir/rng.hpp"

namespace renoir {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

// Raw moon arcs: label 0 is the upper unit half-circle, label 1 the lower
// one shifted right and up, the usual interleaving construction.
Eigen::Vector2d raw_arc(int label, double t) {
    if (label == 0) return {std::cos(t), std::sin(t)};
    return {1.0 - std::cos(t), 0.5 - std::sin(t)};
}
}  // namespace

Dataset gen_blobs(std::int64_t n, const std::vector<Eigen::VectorXd>& centers, double spread,
                  std::uint64_t seed, const std::vector<int>& center_labels) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (centers.empty()) throw std::invalid_argument("need at least one center");
    if (!(spread > 0.0)) throw std::invalid_argument("spread must be positive");
    if (!center_labels.empty() && center_labels.size() != centers.size())
        throw std::invalid_argument("center_labels must match the center count");
    const int d = static_cast<int>(centers.front().size());
    for (const auto& c : centers) {
        if (c.size() != d) throw std::invalid_argument("centers have uneven dimensions");
        if (c.lpNorm<Eigen::Infinity>() > 1.0)
            throw std::invalid_argument("centers must lie inside [-1,1]");
    }
    int num_classes = static_cast<int>(centers.size());
    if (!center_labels.empty()) {
        num_classes = 0;
        for (int label : center_labels) num_classes = std::max(num_classes, label + 1);
    }

    Eigen::MatrixXd inputs(n, d);
    std::vector<int> labels(static_cast<std::size_t>(n));
    const std::uint64_t base = rng::derive(seed, rng::kSample);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto center = static_cast<std::size_t>(i % static_cast<std::int64_t>(centers.size()));
        rng::Stream stream(base, static_cast<std::uint64_t>(i));
        for (int j = 0; j < d; ++j) {
            const double v = centers[center](j) + spread * stream.next_gauss();
            inputs(i, j) = std::clamp(v, -1.0, 1.0);
        }
        labels[static_cast<std::size_t>(i)] =
            center_labels.empty() ? static_cast<int>(center) : center_labels[center];
    }
    return Dataset(std::move(inputs), std::move(labels), num_classes);
}

Eigen::Vector2d moons_arc_point(int label, double t) {
    const Eigen::Vector2d raw = raw_arc(label, t);
    // Raw arcs span [-1,2] x [-0.5,1]; map into [-1,1]^2 with a small margin.
    return {(raw.x() - 0.5) * 0.6, (raw.y() - 0.25) * 0.8};
}

Dataset gen_two_moons(std::int64_t n, double noise_sd, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be >= 0");
    Eigen::MatrixXd inputs(n, 2);
    std::vector<int> labels(static_cast<std::size_t>(n));
    const std::uint64_t base = rng::derive(seed, rng::kSample);
    for (std::int64_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(i % 2);
        rng::Stream stream(base, static_cast<std::uint64_t>(i));
        const double t = kPi * stream.next_double();
        Eigen::Vector2d p = moons_arc_point(cls, t);
        if (noise_sd > 0.0) {
            p.x() += noise_sd * stream.next_gauss();
            p.y() += noise_sd * stream.next_gauss();
        }
        inputs(i, 0) = std::clamp(p.x(), -1.0, 1.0);
        inputs(i, 1) = std::clamp(p.y(), -1.0, 1.0);
        labels[static_cast<std::size_t>(i)] = cls;
    }
    return Dataset(std::move(inputs), std::move(labels), 2);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("'" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "label")
        throw std::invalid_argument("'" + path + "': header must be f1,...,fd,label");
    const int d = static_cast<int>(header.size()) - 1;
    for (int j = 0; j < d; ++j)
        if (header[static_cast<std::size_t>(j)] != "f" + std::to_string(j + 1))
            throw std::invalid_argument("'" + path + "': unexpected header column '" +
                                        header[static_cast<std::size_t>(j)] + "'");

    std::vector<double> values;
    std::vector<int> labels;
    std::int64_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            ++col;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw std::invalid_argument("'" + path + "': row " + std::to_string(row) +
                                            " column " + std::to_string(col) + " is not a number");
            if (col <= d) {
                if (v < -1.0 || v > 1.0)
                    throw std::invalid_argument("'" + path + "': row " + std::to_string(row) +
                                                " column " + std::to_string(col) +
                                                " is outside [-1,1]");
                values.push_back(v);
            } else {
                if (v != std::floor(v) || v < 0.0)
                    throw std::invalid_argument("'" + path + "': row " + std::to_string(row) +
                                                " label is not a non-negative integer");
                labels.push_back(static_cast<int>(v));
            }
        }
        if (col != d + 1)
            throw std::invalid_argument("'" + path + "': row " + std::to_string(row) + " has " +
                                        std::to_string(col) + " columns, expected " +
                                        std::to_string(d + 1));
    }
    if (labels.empty()) throw std::invalid_argument("'" + path + "' has a header but no rows");

    const int num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
    for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
    for (int c = 0; c < num_classes; ++c)
        if (!seen[static_cast<std::size_t>(c)])
            throw std::invalid_argument("'" + path + "': class " + std::to_string(c) +
                                        " is absent; labels must cover 0..K-1");

    const std::int64_t n = static_cast<std::int64_t>(labels.size());
    Eigen::MatrixXd inputs(n, d);
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) inputs(i, j) = values[static_cast<std::size_t>(i * d + j)];
    return Dataset(std::move(inputs), std::move(labels), num_classes);
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    for (int j = 0; j < data.dim(); ++j) out << "f" << (j + 1) << ",";
    out << "label\n";
    for (std::int64_t i = 0; i < data.size(); ++i) {
        for (int j = 0; j < data.dim(); ++j) out << format_g9(data.inputs()(i, j)) << ",";
        out << data.label(i) << "\n";
    }
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Dataset dataset_from_json(const nlohmann::json& spec) {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "blobs") {
        const auto raw = spec.at("centers").get<std::vector<std::vector<double>>>();
        std::vector<Eigen::VectorXd> centers;
        centers.reserve(raw.size());
        for (const auto& c : raw)
            centers.push_back(Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<int>(c.size())));
        std::vector<int> center_labels;
        if (spec.contains("labels")) center_labels = spec.at("labels").get<std::vector<int>>();
        return gen_blobs(spec.at("n").get<std::int64_t>(), centers, spec.at("spread").get<double>(),
                         spec.at("seed").get<std::uint64_t>(), center_labels);
    }
    if (kind == "moons")
        return gen_two_moons(spec.at("n").get<std::int64_t>(), spec.at("noise_sd").get<double>(),
                             spec.at("seed").get<std::uint64_t>());
    if (kind == "csv") return load_csv(spec.at("path").get<std::string>());
    throw std::invalid_argument("unknown dataset kind '" + kind + "'");
}

}  // namespace renoir
