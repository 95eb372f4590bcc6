#include "renoir/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "renoir/rng.hpp"

namespace renoir {

const char* norm_name(Norm n) {
    switch (n) {
        case Norm::L1: return "l1";
        case Norm::L2: return "l2";
        case Norm::Linf: return "linf";
    }
    return "?";
}

Norm norm_from_name(const std::string& name) {
    if (name == "l1") return Norm::L1;
    if (name == "l2") return Norm::L2;
    if (name == "linf") return Norm::Linf;
    throw std::invalid_argument("unknown norm '" + name + "' (expected l1, l2 or linf)");
}

namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int n) { g_max_threads.store(std::max(1, n)); }

int max_threads() { return g_max_threads.load(); }

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
    const int workers = static_cast<int>(std::min<std::int64_t>(max_threads(), n));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= n) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (int t = 1; t < workers; ++t) pool.emplace_back(run);
    run();
    for (auto& th : pool) th.join();
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return data[0];
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

double pairwise_mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty vector");
    return pairwise_sum(v) / static_cast<double>(v.size());
}

std::string format_g9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

}  // namespace renoir

namespace renoir::rng {

double Stream::next_gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = next_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Stream::next_laplace() {
    const double u = next_open();
    return u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
}

}  // namespace renoir::rng
