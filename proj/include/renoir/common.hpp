#ifndef RENOIR_COMMON_HPP
#define RENOIR_COMMON_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace renoir {

// Raised when a computation fails numerically at run time (singular matrix,
// non-finite loss, ...). Configuration and validation problems use
// std::invalid_argument instead so callers can map them to distinct exit codes.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Norm { L1, L2, Linf };

const char* norm_name(Norm n);
Norm norm_from_name(const std::string& name);

// Global worker cap for parallel_for. Thread-count changes never change
// results: each index writes its own slot and reductions stay sequential.
void set_max_threads(int n);
int max_threads();

// Runs body(i) for i in [0, n). Deterministic output regardless of the
// worker count; falls back to a plain loop when max_threads() == 1.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

// Recursive-halving sum. Besides better rounding behaviour than a running
// sum, it makes sum(v ++ v) == 2 * sum(v) exactly, so means are invariant
// under batch duplication.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& v);
double pairwise_mean(const std::vector<double>& v);

// Shortest-width decimal with 9 significant digits, used by every CSV writer.
std::string format_g9(double x);

}  // namespace renoir

#endif
