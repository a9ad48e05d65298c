#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mgw/forest.hpp"
#include "mgw/offspring.hpp"
#include "mgw/rng.hpp"
#include "mgw/sampler.hpp"

namespace mgw {

constexpr double no_value = std::numeric_limits<double>::quiet_NaN();

struct Statistic {
    std::string label;
    std::string anchor;
    double estimate = no_value;
    double std_error = no_value;
    double target = no_value;
    double tolerance = no_value;
    bool pass = true;
    bool informational = false;
    std::string note;
};

struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> parameters;  // values pre-rendered as JSON
    std::vector<Statistic> statistics;
    bool aborted = false;  // a calibration row failed and later rows were skipped
    double runtime_seconds = 0.0;
    bool include_runtime = false;

    void param(const std::string& key, double value);
    void param(const std::string& key, std::int64_t value);
    void param(const std::string& key, const std::string& value);
    void param(const std::string& key, const std::vector<std::uint64_t>& values);

    // pass = |estimate - target| <= tolerance; rows without a target always pass.
    Statistic& add(Statistic s);
    const Statistic* find(const std::string& label) const;
    // True when no calibration row failed and every non-informational row passes.
    bool passed() const;

    std::string to_json() const;
    std::string to_csv() const;
};

struct RunOptions {
    std::uint64_t seed = default_seed;
    unsigned workers = 1;
    std::map<std::string, double> tolerances;  // overrides by row label
    bool timing = false;
    std::uint64_t max_vertices = 50'000'000;
    std::uint64_t max_tries = 200'000'000;

    double tolerance(const std::string& label, double fallback) const;
    // Stream for replica r of stage s.
    Rng stream(std::uint64_t stage, std::uint64_t r) const { return Rng(derive_seed(derive_seed(seed, stage), r)); }
};

// Runs f(r) for r = 0..count-1 on up to `workers` threads; results are kept in replica order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t count, unsigned workers, F&& f) {
    std::vector<R> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            std::size_t r = next.fetch_add(1);
            if (r >= count) return;
            try {
                out[r] = f(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count ? count : 1)));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

// Linear interpolation between order statistics; the input is copied.
double quantile(std::vector<double> x, double q);
// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);
double lag1_autocorrelation(const std::vector<double>& x);

// sup over s in [0, 1] of |lambda[floor(n s)] / scale - slope * s| where lambda
// holds Lambda(0..n) (n + 1 values) and the grid step is 1/n. Exact on each
// constancy interval.
double sup_linear_deviation(const std::vector<std::int64_t>& lambda, double scale, double slope);

// Deleted-vertex counters of the first `count` reduced vertices, generated in
// depth-first order without storing the forest. Draws in the same order as a
// ForestGrower with constant root type i.
struct NijStream {
    std::vector<int> others;
    std::vector<std::uint64_t> counters;  // counters[u * others.size() + k]
    std::uint64_t vertices = 0;           // vertices generated
};
NijStream nij_stream(const ChildSampler& sampler, int i, std::size_t count, Rng& rng, std::uint64_t max_vertices);

ExperimentReport types_convergence(const OffspringSpec& spec, int i, std::uint64_t n, std::size_t replicas,
                                   const RunOptions& opt);
ExperimentReport height_coupling(const OffspringSpec& spec, int i, const std::vector<std::uint64_t>& n_values,
                                 std::size_t replicas, const RunOptions& opt);
ExperimentReport max_height_tail(const OffspringSpec& spec, int i, const std::vector<std::uint64_t>& n_values,
                                 std::uint64_t reps, const RunOptions& opt);
ExperimentReport upsilon_scaling(const OffspringSpec& spec, int i, std::uint64_t n, std::size_t replicas,
                                 const RunOptions& opt);
ExperimentReport nij_moments(const OffspringSpec& spec, int i, std::size_t sample_size, const RunOptions& opt);
ExperimentReport size_tail_exponent(const OffspringSpec& spec, int j, const std::vector<std::uint64_t>& n_grid,
                                    std::uint64_t reps, const RunOptions& opt);
ExperimentReport conditioned_profile(const OffspringSpec& spec, int j, const std::vector<std::uint64_t>& n_values,
                                     std::size_t replicas, const RunOptions& opt);

}  // namespace mgw
