#ifndef RENOIR_DATA_HPP
#define RENOIR_DATA_HPP

#include <string>
#include <vector>

#include "json.hpp"
#include "renoir/net.hpp"

namespace renoir {

// Gaussian clusters around the given centers, points cycling through the
// centers so clusters stay balanced within one point. Points are clipped to
// the [-1,1] box. center_labels maps each center to its class (several
// clusters may share one); empty means center i is class i.
Dataset gen_blobs(std::int64_t n, const std::vector<Eigen::VectorXd>& centers, double spread,
                  std::uint64_t seed, const std::vector<int>& center_labels = {});

// Two interleaved half-circles scaled into [-1,1]^2, with isotropic jitter
// of standard deviation noise_sd added after scaling.
Dataset gen_two_moons(std::int64_t n, double noise_sd, std::uint64_t seed);

// The affine map used by gen_two_moons from raw arc coordinates to the
// [-1,1] box; exposed so tests can invert it.
Eigen::Vector2d moons_arc_point(int label, double t);

// CSV with header f1,...,fd,label. Values must be in [-1,1]; labels must be
// integers covering 0..K-1.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

// Builds a dataset from a generator/loader spec:
//   {"kind":"blobs","n":400,"centers":[[..],[..]],"spread":0.15,"seed":1}
//   {"kind":"moons","n":400,"noise_sd":0.1,"seed":1}
//   {"kind":"csv","path":"points.csv"}
Dataset dataset_from_json(const nlohmann::json& spec);

}  // namespace renoir

#endif
