#include "mgw/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "mgw/constants.hpp"
#include "mgw/errors.hpp"
#include "mgw/spectral.hpp"

namespace mgw {

namespace {

std::string fmt(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

double mean_of(const std::vector<double>& x) {
    if (x.empty()) return no_value;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd_of(const std::vector<double>& x) {
    if (x.size() < 2) return no_value;
    double m = mean_of(x), s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

using Clock = std::chrono::steady_clock;

void finish(ExperimentReport& rep, Clock::time_point start, const RunOptions& opt) {
    rep.include_runtime = opt.timing;
    rep.runtime_seconds = std::chrono::duration<double>(Clock::now() - start).count();
}

void check_type(const OffspringSpec& spec, int i) {
    if (i < 1 || i > spec.d()) throw RangeError("type outside [1, d]");
}

Statistic row(std::string label, std::string anchor, double estimate, double target, double tolerance,
              bool informational = false) {
    Statistic s;
    s.label = std::move(label);
    s.anchor = std::move(anchor);
    s.estimate = estimate;
    s.target = target;
    s.tolerance = tolerance;
    s.informational = informational;
    return s;
}

// Grows a forest with constant root type i until it holds at least `size` vertices.
void grow_to(ForestGrower& g, std::size_t size, Rng& rng, std::uint64_t max_vertices) {
    while (g.forest().size() < size) {
        if (g.forest().size() >= max_vertices) throw BudgetError("forest exceeded the vertex budget");
        g.step(rng);
    }
}

// Blocks of replicas share one stream so that cheap replicas are not dominated by scheduling.
constexpr std::uint64_t block_size = 4096;

std::string join(const std::vector<std::uint64_t>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
}

}  // namespace

void ExperimentReport::param(const std::string& key, double value) { parameters.emplace_back(key, fmt(value)); }
void ExperimentReport::param(const std::string& key, std::int64_t value) { parameters.emplace_back(key, std::to_string(value)); }
void ExperimentReport::param(const std::string& key, const std::string& value) { parameters.emplace_back(key, quoted(value)); }
void ExperimentReport::param(const std::string& key, const std::vector<std::uint64_t>& values) {
    parameters.emplace_back(key, "[" + join(values) + "]");
}

Statistic& ExperimentReport::add(Statistic s) {
    if (std::isfinite(s.target)) s.pass = std::isfinite(s.estimate) && std::abs(s.estimate - s.target) <= s.tolerance;
    statistics.push_back(std::move(s));
    return statistics.back();
}

const Statistic* ExperimentReport::find(const std::string& label) const {
    for (const auto& s : statistics)
        if (s.label == label) return &s;
    return nullptr;
}

bool ExperimentReport::passed() const {
    if (aborted) return false;
    for (const auto& s : statistics)
        if (!s.informational && !s.pass) return false;
    return true;
}

std::string ExperimentReport::to_json() const {
    std::ostringstream o;
    o << "{\n  \"name\": " << quoted(name) << ",\n  \"parameters\": {";
    for (std::size_t k = 0; k < parameters.size(); ++k)
        o << (k ? ", " : "") << quoted(parameters[k].first) << ": " << parameters[k].second;
    o << "},\n  \"statistics\": [";
    for (std::size_t k = 0; k < statistics.size(); ++k) {
        const auto& s = statistics[k];
        o << (k ? ",\n" : "\n") << "    {\"label\": " << quoted(s.label) << ", \"anchor\": " << quoted(s.anchor)
          << ", \"estimate\": " << fmt(s.estimate) << ", \"std_error\": " << fmt(s.std_error)
          << ", \"target\": " << fmt(s.target) << ", \"tolerance\": " << fmt(s.tolerance)
          << ", \"pass\": " << (s.pass ? "true" : "false") << ", \"informational\": " << (s.informational ? "true" : "false")
          << ", \"note\": " << quoted(s.note) << "}";
    }
    o << (statistics.empty() ? "" : "\n  ") << "],\n  \"aborted\": " << (aborted ? "true" : "false")
      << ",\n  \"passed\": " << (passed() ? "true" : "false");
    if (include_runtime) o << ",\n  \"runtime_seconds\": " << fmt(runtime_seconds);
    o << "\n}\n";
    return o.str();
}

std::string ExperimentReport::to_csv() const {
    std::ostringstream o;
    o << "label,anchor,estimate,std_error,target,tolerance,pass,informational,note\n";
    auto num = [](double x) { return std::isfinite(x) ? fmt(x) : std::string(); };
    for (const auto& s : statistics)
        o << csv_field(s.label) << ',' << csv_field(s.anchor) << ',' << num(s.estimate) << ',' << num(s.std_error) << ','
          << num(s.target) << ',' << num(s.tolerance) << ',' << (s.pass ? 1 : 0) << ',' << (s.informational ? 1 : 0) << ','
          << csv_field(s.note) << '\n';
    return o.str();
}

double RunOptions::tolerance(const std::string& label, double fallback) const {
    auto it = tolerances.find(label);
    return it == tolerances.end() ? fallback : it->second;
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) return no_value;
    std::sort(x.begin(), x.end());
    double h = q * static_cast<double>(x.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) return no_value;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x = j == b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = mean_of(x), my = mean_of(y), sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    if (n < 2 || sxx == 0.0) return no_value;
    return sxy / sxx;
}

double lag1_autocorrelation(const std::vector<double>& x) {
    if (x.size() < 3) return no_value;
    double m = mean_of(x), num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        den += (x[k] - m) * (x[k] - m);
        if (k + 1 < x.size()) num += (x[k] - m) * (x[k + 1] - m);
    }
    return den > 0.0 ? num / den : 0.0;
}

double sup_linear_deviation(const std::vector<std::int64_t>& lambda, double scale, double slope) {
    const std::size_t n = lambda.size() - 1;
    if (n == 0) return std::abs(static_cast<double>(lambda[0]) / scale);
    const double step = 1.0 / static_cast<double>(n);
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double v = static_cast<double>(lambda[k]) / scale;
        d = std::max({d, std::abs(v - slope * static_cast<double>(k) * step), std::abs(v - slope * static_cast<double>(k + 1) * step)});
    }
    return std::max(d, std::abs(static_cast<double>(lambda[n]) / scale - slope));
}

NijStream nij_stream(const ChildSampler& sampler, int i, std::size_t count, Rng& rng, std::uint64_t max_vertices) {
    const int d = sampler.d();
    NijStream out;
    std::vector<std::size_t> slot(static_cast<std::size_t>(d) + 1, 0);
    for (int j = 1; j <= d; ++j)
        if (j != i) {
            slot[static_cast<std::size_t>(j)] = out.others.size();
            out.others.push_back(j);
        }
    const std::size_t w = out.others.size();
    out.counters.assign(count * w, 0);
    struct Entry {
        std::int64_t owner;
        std::uint16_t type;
    };
    std::vector<Entry> stack;
    std::vector<std::uint16_t> kids;
    const auto limit = static_cast<std::int64_t>(count);
    std::int64_t reduced = 0;
    std::uint64_t open = 0;  // stack entries whose owner is among the first `count` reduced vertices
    while (true) {
        if (reduced >= limit && open == 0) break;
        if (out.vertices >= max_vertices) throw BudgetError("counter stream exceeded the vertex budget");
        Entry e = stack.empty() ? Entry{-1, static_cast<std::uint16_t>(i)} : stack.back();
        if (!stack.empty()) stack.pop_back();
        if (e.owner >= 0 && e.owner < limit) --open;
        ++out.vertices;
        std::int64_t own;
        if (e.type == i) {
            own = reduced++;
        } else {
            own = e.owner;
            if (own >= 0 && own < limit) ++out.counters[static_cast<std::size_t>(own) * w + slot[e.type]];
        }
        sampler.draw(e.type, rng, kids);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({own, *it});
        if (own >= 0 && own < limit) open += kids.size();
    }
    return out;
}

ExperimentReport types_convergence(const OffspringSpec& spec, int i, std::uint64_t n, std::size_t replicas,
                                   const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, i);
    if (n < 1) throw RangeError("n must be at least 1");
    check_not_supercritical(spec);
    const auto perron_data = perron(mean_matrix(spec));
    const double a = perron_data.a[static_cast<std::size_t>(i - 1)];
    ExperimentReport rep;
    rep.name = "types_convergence";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{i});
    rep.param("n", static_cast<std::int64_t>(n));
    rep.param("replicas", static_cast<std::int64_t>(replicas));
    rep.param("seed", std::to_string(opt.seed));
    rep.param("a_i", a);

    ChildSampler sampler(spec);
    auto d = parallel_map<double>(replicas, opt.workers, [&](std::size_t r) {
        Rng rng = opt.stream(0, r);
        ForestGrower g(sampler, {i});
        grow_to(g, n + 1, rng, opt.max_vertices);
        std::vector<std::int64_t> lambda(n + 1);
        std::int64_t c = 0;
        for (std::size_t k = 0; k <= n; ++k) lambda[k] = c += (g.forest().type(k) == i);
        return sup_linear_deviation(lambda, static_cast<double>(n), a);
    });
    rep.add(row("d_median", "convergence of types", quantile(d, 0.5), no_value, no_value, true));
    auto& p90 = rep.add(row("d_p90", "convergence of types", quantile(d, 0.9), 0.0, opt.tolerance("d_p90", 0.05)));
    p90.note = "90th percentile of sup |Lambda_i(floor(ns))/n - a_i s|";
    rep.add(row("d_max", "convergence of types", *std::max_element(d.begin(), d.end()), no_value, no_value, true));
    finish(rep, start, opt);
    return rep;
}

namespace {

struct CouplingSample {
    double e = 0.0;        // index Lambda_i(k), as in the coupling statistic
    double e_prev = 0.0;   // index Lambda_i(k) - 1
    double ancestor = 0.0; // |H_k - Anc(i)/(a b)|
    double max_height = 0.0;
};

}  // namespace

ExperimentReport height_coupling(const OffspringSpec& spec, int i, const std::vector<std::uint64_t>& n_values,
                                 std::size_t replicas, const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, i);
    check_not_supercritical(spec);
    const auto c = limit_constants(spec);
    const std::size_t ii = static_cast<std::size_t>(i - 1);
    const double ab = c.perron.a[ii] * c.perron.b[ii];
    const double alpha = c.alpha_min;
    ExperimentReport rep;
    rep.name = "height_coupling";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{i});
    rep.param("n_values", n_values);
    rep.param("replicas", static_cast<std::int64_t>(replicas));
    rep.param("seed", std::to_string(opt.seed));
    rep.param("alpha_min", alpha);
    rep.param("a_i_b_i", ab);

    ChildSampler sampler(spec);
    std::vector<double> medians;
    std::vector<CouplingSample> last;
    for (std::size_t stage = 0; stage < n_values.size(); ++stage) {
        const std::uint64_t n = n_values[stage];
        const double norm = std::pow(static_cast<double>(n), 1.0 - 1.0 / alpha);
        auto samples = parallel_map<CouplingSample>(replicas, opt.workers, [&](std::size_t r) {
            Rng rng = opt.stream(stage, r);
            ForestGrower g(sampler, {i});
            grow_to(g, n + 1, rng, opt.max_vertices);
            const Forest& f = g.forest();
            std::int64_t lambda_n = 0;
            for (std::size_t k = 0; k <= n; ++k) lambda_n += f.type(k) == i;
            // The reduced vertex with index Lambda_i(n) must exist.
            std::int64_t seen = f.count_type(i);
            while (seen <= lambda_n) {
                if (f.size() >= opt.max_vertices) throw BudgetError("forest exceeded the vertex budget");
                seen += f.type(g.step(rng)) == i;
            }
            std::vector<std::uint32_t> anc(f.size());
            std::vector<std::uint32_t> reduced_height;
            for (std::size_t v = 0; v < f.size(); ++v) {
                auto p = f.parent(v);
                anc[v] = p == Forest::no_parent ? 0 : anc[static_cast<std::size_t>(p)] + (f.type(static_cast<std::size_t>(p)) == i);
                if (f.type(v) == i) reduced_height.push_back(anc[v]);
            }
            CouplingSample s;
            std::int64_t lambda = 0;
            for (std::size_t k = 0; k <= n; ++k) {
                lambda += f.type(k) == i;
                double h = f.depth(k);
                s.e = std::max(s.e, std::abs(h - reduced_height[static_cast<std::size_t>(lambda)] / ab));
                double prev = lambda > 0 ? reduced_height[static_cast<std::size_t>(lambda - 1)] : 0.0;
                s.e_prev = std::max(s.e_prev, std::abs(h - prev / ab));
                s.ancestor = std::max(s.ancestor, std::abs(h - anc[k] / ab));
                s.max_height = std::max(s.max_height, h);
            }
            s.e /= norm;
            s.e_prev /= norm;
            s.ancestor /= norm;
            return s;
        });
        std::vector<double> e, e_prev, anc;
        for (const auto& s : samples) {
            e.push_back(s.e);
            e_prev.push_back(s.e_prev);
            anc.push_back(s.ancestor);
        }
        medians.push_back(quantile(e, 0.5));
        const std::string tag = "_n" + std::to_string(n);
        const bool final_stage = stage + 1 == n_values.size();
        if (final_stage)
            rep.add(row("e_median" + tag, "height coupling", medians.back(), 0.0, opt.tolerance("e_median" + tag, 0.2)));
        else
            rep.add(row("e_median" + tag, "height coupling", medians.back(), no_value, no_value, true));
        rep.add(row("e_prev_median" + tag, "height coupling", quantile(e_prev, 0.5), no_value, no_value, true)).note =
            "reduced index Lambda_i(k) - 1";
        rep.add(row("ancestor_median" + tag, "height coupling", quantile(anc, 0.5), no_value, no_value, true)).note =
            "sup |H_k - Anc(i)/(a_i b_i)|";
        if (final_stage) last = std::move(samples);
    }
    if (medians.size() > 1) {
        double violations = 0;
        for (std::size_t k = 1; k < medians.size(); ++k) violations += medians[k] >= medians[k - 1];
        rep.add(row("e_median_decreasing", "height coupling", violations, 0.0, opt.tolerance("e_median_decreasing", 0.0))).note =
            "number of consecutive n where the median does not decrease";
    }
    if (!n_values.empty()) {
        const double n = static_cast<double>(n_values.back());
        const double bound = std::pow(n, 1.0 - 1.0 / alpha + 0.15);
        double below = 0;
        for (const auto& s : last) below += s.max_height < bound;
        auto& s = rep.add(row("max_height_below_bound", "sub-exponential height bound", below / static_cast<double>(last.size()), 1.0,
                              opt.tolerance("max_height_below_bound", 0.01)));
        s.note = "fraction of replicas with max height < n^(1 - 1/alpha + 0.15)";
    }
    finish(rep, start, opt);
    return rep;
}

namespace {

// Fraction of `reps` trees reaching generation h, in blocks with their own streams.
double reach_fraction(const ChildSampler& sampler, int i, std::uint64_t h, std::uint64_t reps, const RunOptions& opt,
                      std::uint64_t stage) {
    const std::size_t blocks = static_cast<std::size_t>((reps + block_size - 1) / block_size);
    auto hits = parallel_map<std::uint64_t>(blocks, opt.workers, [&](std::size_t b) {
        Rng rng = opt.stream(stage, b);
        std::uint64_t count = std::min<std::uint64_t>(block_size, reps - b * block_size), hit = 0;
        for (std::uint64_t r = 0; r < count; ++r) {
            auto res = sample_height_reach(sampler, i, h, opt.max_vertices, rng);
            if (res.status != SampleStatus::ok) throw BudgetError("generation population exceeded the budget");
            hit += res.reached;
        }
        return hit;
    });
    return static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::uint64_t{0})) / static_cast<double>(reps);
}

}  // namespace

ExperimentReport max_height_tail(const OffspringSpec& spec, int i, const std::vector<std::uint64_t>& n_values,
                                 std::uint64_t reps, const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, i);
    check_not_supercritical(spec);
    ExperimentReport rep;
    rep.name = "max_height_tail";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{i});
    rep.param("n_values", n_values);
    rep.param("reps", static_cast<std::int64_t>(reps));
    rep.param("seed", std::to_string(opt.seed));
    const std::uint64_t n_cal = n_values.empty() ? 128 : n_values.back();
    auto binom_se = [&](double p, double n) { return n * std::sqrt(p * (1.0 - p) / static_cast<double>(reps)); };

    // Calibration: single-type Geometric(1/2) has n P(ht >= n) -> 2 / sigma^2 = 1.
    {
        auto mono = monotype_geometric_spec(Rational(1, 2));
        ChildSampler cal(mono);
        double p = reach_fraction(cal, 1, n_cal, reps, opt, 0);
        auto& s = rep.add(row("calibration_d1_n" + std::to_string(n_cal), "maximal height tail (single type)",
                              static_cast<double>(n_cal) * p, 1.0, opt.tolerance("calibration_d1", 0.2)));
        s.std_error = binom_se(p, static_cast<double>(n_cal));
        s.note = "calibration";
        if (!s.pass) {
            rep.aborted = true;
            finish(rep, start, opt);
            return rep;
        }
    }

    ChildSampler sampler(spec);
    {
        double p = reach_fraction(sampler, i, 1, reps, opt, 1);
        double target = 1.0 - spec.prob_zero(i);
        double se = std::sqrt(target * (1.0 - target) / static_cast<double>(reps));
        auto& s = rep.add(row("sanity_n1", "maximal height tail", p, target, opt.tolerance("sanity_n1", std::max(4.0 * se, 1e-12))));
        s.std_error = binom_se(p, 1.0);
        s.note = "P(root has a child)";
    }
    const auto c = limit_constants(spec);
    const double target = height_tail_constant(c, i);
    rep.param("height_tail_constant", target);
    rep.param("cbar", c.cbar);
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        const std::uint64_t n = n_values[k];
        double p = reach_fraction(sampler, i, n, reps, opt, 2 + k);
        double est = static_cast<double>(n) * p;
        auto& s = rep.add(row("n_tail_n" + std::to_string(n), "maximal height tail", est, target,
                              opt.tolerance("n_tail", 0.2 * target)));
        s.std_error = binom_se(p, static_cast<double>(n));
        if (s.std_error > 0.1 * target) s.note = "insufficient replicas for 10% relative precision";
        if (k + 1 == n_values.size() && c.alpha_min == 2.0) {
            // The covariance convention without the factor 1/2 scales cbar by sqrt(2) and the constant by 1/2.
            auto& alt = rep.add(row("alternative_constant_n" + std::to_string(n), "maximal height tail", est, 0.5 * target,
                                    0.2 * 0.5 * target, true));
            alt.std_error = s.std_error;
            alt.note = "candidate constant with cbar scaled by sqrt(2)";
        }
    }
    finish(rep, start, opt);
    return rep;
}

namespace {

struct UpsilonSample {
    double x = 0.0;       // multitype pipeline
    double y = 0.0;       // reduced forest of the same sample
    double raw = 0.0;     // Upsilon_n / sqrt(n)
};

}  // namespace

ExperimentReport upsilon_scaling(const OffspringSpec& spec, int i, std::uint64_t n, std::size_t replicas,
                                 const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, i);
    check_not_supercritical(spec);
    const auto c = limit_constants(spec);
    const std::size_t ii = static_cast<std::size_t>(i - 1);
    const double a = c.perron.a[ii], b = c.perron.b[ii], alpha = c.alpha_min;
    const std::uint64_t m = static_cast<std::uint64_t>(std::floor(a * static_cast<double>(n)));
    if (m < 1) throw RangeError("n too small for the matched reduced count");
    const double exponent = 1.0 - 1.0 / alpha;
    const double nx = std::pow(static_cast<double>(n), exponent), mx = std::pow(static_cast<double>(m), exponent);

    double cbar_mono = no_value;
    std::optional<OffspringSpec> mono;
    if (spec.d() == 1) {
        mono = spec;
        cbar_mono = c.cbar;
    } else if (spec.is_exact()) {
        mono = reduced_monotype_spec(spec, i);
        cbar_mono = limit_constants(*mono).cbar;
    } else {
        // Same constant from the multitype cbar: cbar / b_i = a_i^(1/alpha) cbar_mono.
        cbar_mono = c.cbar / (b * std::pow(a, 1.0 / alpha));
    }
    ExperimentReport rep;
    rep.name = "upsilon_scaling";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{i});
    rep.param("n", static_cast<std::int64_t>(n));
    rep.param("m", static_cast<std::int64_t>(m));
    rep.param("replicas", static_cast<std::int64_t>(replicas));
    rep.param("seed", std::to_string(opt.seed));
    rep.param("cbar", c.cbar);
    rep.param("cbar_reduced", cbar_mono);

    ChildSampler sampler(spec);
    auto samples = parallel_map<UpsilonSample>(replicas, opt.workers, [&](std::size_t r) {
        Rng rng = opt.stream(0, r);
        ForestGrower g(sampler, {i});
        grow_to(g, n + 1, rng, opt.max_vertices);
        UpsilonSample s;
        const double upsilon = static_cast<double>(component_index_at(g.forest(), n));
        s.x = b * upsilon / (c.cbar * nx);
        s.raw = upsilon / std::sqrt(static_cast<double>(n));
        // Reduced component index at m: reduced roots among the first m + 1 type-i vertices.
        std::uint64_t seen = g.forest().count_type(i);
        while (seen < m + 1) {
            if (g.forest().size() >= opt.max_vertices) throw BudgetError("forest exceeded the vertex budget");
            seen += g.forest().type(g.step(rng)) == i;
        }
        // A type-i vertex opens a reduced component when no type-i vertex lies above it.
        const Forest& f = g.forest();
        std::vector<std::uint32_t> anc(f.size());
        std::uint64_t count = 0;
        std::int64_t roots = 0;
        for (std::size_t v = 0; v < f.size(); ++v) {
            auto p = f.parent(v);
            anc[v] = p == Forest::no_parent ? 0 : anc[static_cast<std::size_t>(p)] + (f.type(static_cast<std::size_t>(p)) == i);
            if (f.type(v) != i) continue;
            roots += anc[v] == 0;
            if (count++ == m) break;
        }
        s.y = static_cast<double>(roots) / (cbar_mono * mx);
        return s;
    });
    std::vector<double> x, y, raw;
    for (const auto& s : samples) {
        x.push_back(s.x);
        y.push_back(s.y);
        raw.push_back(s.raw);
    }
    auto& ks = rep.add(row("ks_matched", "component index scaling", ks_statistic(x, y), 0.0, opt.tolerance("ks_matched", 0.05)));
    ks.note = "same forest: (b_i/cbar) Upsilon_n / n^(1-1/alpha) against the reduced forest at m = floor(a_i n)";
    rep.add(row("x_mean", "component index scaling", mean_of(x), no_value, no_value, true));
    rep.add(row("y_mean", "component index scaling", mean_of(y), no_value, no_value, true));

    if (mono) {
        ChildSampler mono_sampler(*mono);
        auto indep = parallel_map<double>(replicas, opt.workers, [&](std::size_t r) {
            Rng rng = opt.stream(1, r);
            ForestGrower g(mono_sampler, {1});
            grow_to(g, m + 1, rng, opt.max_vertices);
            return static_cast<double>(component_index_at(g.forest(), m)) / (cbar_mono * mx);
        });
        double crit = 1.36 * std::sqrt(2.0 / static_cast<double>(replicas));
        auto& s = rep.add(row("ks_independent", "component index scaling", ks_statistic(x, indep), 0.0, crit, true));
        s.note = "independent reduced-law forests; tolerance is the 5% two-sample critical value";
    }
    if (alpha == 2.0) {
        auto& s = rep.add(row("mean_upsilon_sqrt_n", "component index scaling", mean_of(raw), c.cbar / b * 2.0 / std::sqrt(M_PI),
                              0.15 * c.cbar / b * 2.0 / std::sqrt(M_PI), true));
        s.std_error = sd_of(raw) / std::sqrt(static_cast<double>(raw.size()));
        s.note = "half-normal first moment";
    }
    finish(rep, start, opt);
    return rep;
}

ExperimentReport nij_moments(const OffspringSpec& spec, int i, std::size_t sample_size, const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, i);
    check_not_supercritical(spec);
    ExperimentReport rep;
    rep.name = "nij_moments";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{i});
    rep.param("sample_size", static_cast<std::int64_t>(sample_size));
    rep.param("seed", std::to_string(opt.seed));
    if (spec.d() == 1) {
        finish(rep, start, opt);
        return rep;
    }
    const auto perron_data = perron(mean_matrix(spec));
    ChildSampler sampler(spec);
    Rng rng = opt.stream(0, 0);
    auto stream = nij_stream(sampler, i, sample_size, rng, opt.max_vertices);
    rep.param("vertices", static_cast<std::int64_t>(stream.vertices));
    const std::size_t w = stream.others.size();
    const double root_n = std::sqrt(static_cast<double>(sample_size));
    for (std::size_t k = 0; k < w; ++k) {
        const int j = stream.others[k];
        std::vector<double> x(sample_size);
        for (std::size_t u = 0; u < sample_size; ++u) x[u] = static_cast<double>(stream.counters[u * w + k]);
        const double target = perron_data.a[static_cast<std::size_t>(j - 1)] / perron_data.a[static_cast<std::size_t>(i - 1)];
        const double se = sd_of(x) / root_n;
        const std::string tag = "_" + std::to_string(i) + std::to_string(j);
        auto& mean_row = rep.add(row("mean_n" + tag, "deleted-vertex counters", mean_of(x), target,
                                     opt.tolerance("mean_n" + tag, 3.0 * se)));
        mean_row.std_error = se;
        mean_row.note = "target a_j / a_i, tolerance 3 standard errors";
        auto& ac = rep.add(row("lag1_autocorrelation" + tag, "deleted-vertex counters", lag1_autocorrelation(x), 0.0,
                               opt.tolerance("lag1_autocorrelation" + tag, 4.0 / root_n)));
        ac.std_error = 1.0 / root_n;
    }
    finish(rep, start, opt);
    return rep;
}

namespace {

// Number of trees (of `reps`) with #T^(j) >= each grid value.
std::vector<std::uint64_t> count_ccdf(const ChildSampler& sampler, int root, int j, const std::vector<std::uint64_t>& grid,
                                      std::uint64_t reps, const RunOptions& opt, std::uint64_t stage) {
    const std::uint64_t cap = *std::max_element(grid.begin(), grid.end());
    const std::size_t blocks = static_cast<std::size_t>((reps + block_size - 1) / block_size);
    auto parts = parallel_map<std::vector<std::uint64_t>>(blocks, opt.workers, [&](std::size_t b) {
        Rng rng = opt.stream(stage, b);
        std::vector<std::uint64_t> hits(grid.size(), 0);
        std::uint64_t count = std::min<std::uint64_t>(block_size, reps - b * block_size);
        for (std::uint64_t r = 0; r < count; ++r) {
            std::uint64_t x = type_count_capped(sampler, root, j, cap, rng);
            for (std::size_t g = 0; g < grid.size(); ++g) hits[g] += x >= grid[g];
        }
        return hits;
    });
    std::vector<std::uint64_t> total(grid.size(), 0);
    for (const auto& p : parts)
        for (std::size_t g = 0; g < grid.size(); ++g) total[g] += p[g];
    return total;
}

struct SlopeFit {
    double slope = no_value;
    double std_error = no_value;
    std::uint64_t min_hits = 0;
};

SlopeFit fit_ccdf(const std::vector<std::uint64_t>& grid, const std::vector<std::uint64_t>& hits, std::uint64_t reps) {
    SlopeFit fit;
    std::vector<double> x, y;
    fit.min_hits = hits.empty() ? 0 : *std::min_element(hits.begin(), hits.end());
    double sxx = 0.0, var = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (hits[g] == 0) return fit;
        x.push_back(std::log(static_cast<double>(grid[g])));
        y.push_back(std::log(static_cast<double>(hits[g]) / static_cast<double>(reps)));
    }
    fit.slope = ls_slope(x, y);
    // Delta-method error treating the log-frequencies as independent.
    double mx = mean_of(x);
    for (double v : x) sxx += (v - mx) * (v - mx);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double p = static_cast<double>(hits[g]) / static_cast<double>(reps);
        double wgt = (x[g] - mx) / sxx;
        var += wgt * wgt * (1.0 - p) / (p * static_cast<double>(reps));
    }
    fit.std_error = std::sqrt(var);
    return fit;
}

}  // namespace

ExperimentReport size_tail_exponent(const OffspringSpec& spec, int j, const std::vector<std::uint64_t>& n_grid,
                                    std::uint64_t reps, const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, j);
    check_not_supercritical(spec);
    if (n_grid.size() < 2) throw ValidationError("size tail fit needs at least two grid points");
    const int root = spec.root_types().empty() ? 1 : spec.root_types().front();
    ExperimentReport rep;
    rep.name = "size_tail_exponent";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{j});
    rep.param("root_type", std::int64_t{root});
    rep.param("n_grid", n_grid);
    rep.param("reps", static_cast<std::int64_t>(reps));
    rep.param("seed", std::to_string(opt.seed));

    {
        auto mono = monotype_geometric_spec(Rational(1, 2));
        ChildSampler cal(mono);
        auto hits = count_ccdf(cal, 1, 1, n_grid, reps, opt, 0);
        auto fit = fit_ccdf(n_grid, hits, reps);
        auto& s = rep.add(row("calibration_d1_slope", "size tail (single type)", fit.slope, -0.5, opt.tolerance("calibration_d1_slope", 0.1)));
        s.std_error = fit.std_error;
        s.note = "calibration";
        if (!s.pass) {
            rep.aborted = true;
            finish(rep, start, opt);
            return rep;
        }
    }
    const double alpha = limit_constants(spec).alpha_min;
    ChildSampler sampler(spec);
    auto hits = count_ccdf(sampler, root, j, n_grid, reps, opt, 1);
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        auto& s = rep.add(row("ccdf_n" + std::to_string(n_grid[g]), "size tail",
                              static_cast<double>(hits[g]) / static_cast<double>(reps), no_value, no_value, true));
        s.note = std::to_string(hits[g]) + " tail samples";
    }
    auto fit = fit_ccdf(n_grid, hits, reps);
    auto& s = rep.add(row("slope", "size tail", fit.slope, -1.0 / alpha, opt.tolerance("slope", 0.1)));
    s.std_error = fit.std_error;
    if (fit.min_hits < 100) s.note = "few tail samples; interval widened";
    finish(rep, start, opt);
    return rep;
}

namespace {

struct ConditionedSample {
    double prop5 = 0.0;
    double coupling = 0.0;
    double coupling_prev = 0.0;
    double ancestor = 0.0;
    double ratio = 0.0;
    std::vector<std::uint64_t> hist;  // attempts by #T^(j), index n + 1 collects larger counts
    std::uint64_t attempts = 0;
};

}  // namespace

ExperimentReport conditioned_profile(const OffspringSpec& spec, int j, const std::vector<std::uint64_t>& n_values,
                                     std::size_t replicas, const RunOptions& opt) {
    auto start = Clock::now();
    check_type(spec, j);
    if (!spec.is_alternating()) throw DomainError("conditioned_profile needs an alternating spec");
    if (n_values.empty()) throw ValidationError("conditioned_profile needs at least one n");
    check_not_supercritical(spec);
    const auto c = limit_constants(spec);
    const std::size_t jj = static_cast<std::size_t>(j - 1);
    const double a = c.perron.a[jj], ab = a * c.perron.b[jj], alpha = c.alpha_min;
    const int root = 1;
    ExperimentReport rep;
    rep.name = "conditioned_profile";
    rep.param("spec", spec.name());
    rep.param("type", std::int64_t{j});
    rep.param("n_values", n_values);
    rep.param("replicas", static_cast<std::int64_t>(replicas));
    rep.param("seed", std::to_string(opt.seed));
    rep.param("bn_scale", c.bn_scale.value_or(no_value));

    const std::uint64_t horizon = std::max<std::uint64_t>(512, *std::max_element(n_values.begin(), n_values.end()) + 1);
    auto reach = reachable_counts(spec, root, j, horizon);
    rep.param("count_period", static_cast<std::int64_t>(reach.period));
    rep.param("count_residue", static_cast<std::int64_t>(reach.residue));
    for (auto n : n_values)
        if (!reach.contains(n)) throw SupportError("#T^(" + std::to_string(j) + ") = " + std::to_string(n) + " has probability zero");

    ChildSampler sampler(spec);
    std::vector<double> prop5_medians, coupling_medians;
    std::vector<ConditionedSample> last;
    for (std::size_t stage = 0; stage < n_values.size(); ++stage) {
        const std::uint64_t n = n_values[stage];
        const double bn = c.bn_scale.value_or(1.0) * std::pow(static_cast<double>(n), 1.0 / alpha);
        auto samples = parallel_map<ConditionedSample>(replicas, opt.workers, [&](std::size_t r) {
            Rng rng = opt.stream(stage, r);
            ConditionedSample s;
            s.hist.assign(n + 2, 0);
            ForestGrower g(sampler, {root}, true);
            while (true) {
                if (++s.attempts > opt.max_tries) throw BudgetError("conditioned sampling exhausted its attempts");
                g.reset();
                std::uint64_t count = 0;
                do {
                    if (g.forest().size() >= opt.max_vertices) throw BudgetError("conditioned tree exceeded the vertex budget");
                    if (g.forest().type(g.step(rng)) == j) ++count;
                } while (count <= n && !g.between_components());
                ++s.hist[std::min(count, n + 1)];
                if (count == n) break;
            }
            const Forest& t = g.forest();
            const std::size_t size = t.size();
            std::vector<std::int64_t> lambda(size + 1);
            std::vector<std::uint32_t> anc(size), reduced_height;
            std::int64_t cnt = 0;
            for (std::size_t v = 0; v < size; ++v) {
                auto p = t.parent(v);
                anc[v] = p == Forest::no_parent ? 0 : anc[static_cast<std::size_t>(p)] + (t.type(static_cast<std::size_t>(p)) == j);
                if (t.type(v) == j) reduced_height.push_back(anc[v]);
                lambda[v] = cnt += t.type(v) == j;
            }
            lambda[size] = cnt;
            // Lambda_j(floor(#T s)) / n against s, on the grid of step 1 / #T.
            double dev = 0.0;
            for (std::size_t k = 0; k < size; ++k) {
                double v = static_cast<double>(lambda[k]) / static_cast<double>(n);
                dev = std::max({dev, std::abs(v - static_cast<double>(k) / static_cast<double>(size)),
                                std::abs(v - static_cast<double>(k + 1) / static_cast<double>(size))});
            }
            s.prop5 = std::max(dev, std::abs(static_cast<double>(lambda[size]) / static_cast<double>(n) - 1.0));
            double cp = 0.0, cp_prev = 0.0, ca = 0.0;
            for (std::size_t k = 0; k <= size; ++k) {
                double h = k < size ? t.depth(k) : 0.0;
                std::size_t idx = static_cast<std::size_t>(k < size ? lambda[k] : lambda[size]);
                double hp = idx < reduced_height.size() ? reduced_height[idx] : 0.0;
                double hq = idx > 0 && k < size ? reduced_height[idx - 1] : 0.0;
                cp = std::max(cp, std::abs(h - hp / ab));
                cp_prev = std::max(cp_prev, std::abs(h - hq / ab));
                if (k < size) ca = std::max(ca, std::abs(h - anc[k] / ab));
            }
            s.coupling = bn / static_cast<double>(n) * cp;
            s.coupling_prev = bn / static_cast<double>(n) * cp_prev;
            s.ancestor = bn / static_cast<double>(n) * ca;
            s.ratio = static_cast<double>(size) / static_cast<double>(n);
            return s;
        });
        std::vector<double> p5, cpl, cpl_prev, ca;
        for (const auto& s : samples) {
            p5.push_back(s.prop5);
            cpl.push_back(s.coupling);
            cpl_prev.push_back(s.coupling_prev);
            ca.push_back(s.ancestor);
        }
        prop5_medians.push_back(quantile(p5, 0.5));
        coupling_medians.push_back(quantile(cpl, 0.5));
        const std::string tag = "_n" + std::to_string(n);
        const bool final_stage = stage + 1 == n_values.size();
        rep.add(row("lambda_median" + tag, "conditioned type proportion", prop5_medians.back(), final_stage ? 0.0 : no_value,
                    final_stage ? opt.tolerance("lambda_median" + tag, 0.1) : no_value, !final_stage));
        rep.add(row("coupling_median" + tag, "conditioned height coupling", coupling_medians.back(), final_stage ? 0.0 : no_value,
                    final_stage ? opt.tolerance("coupling_median" + tag, 0.25) : no_value, !final_stage));
        rep.add(row("coupling_prev_median" + tag, "conditioned height coupling", quantile(cpl_prev, 0.5), no_value, no_value, true))
            .note = "reduced index Lambda_j(k) - 1";
        rep.add(row("ancestor_median" + tag, "conditioned height coupling", quantile(ca, 0.5), no_value, no_value, true)).note =
            "(B_n/n) sup |H_k - Anc(j)/(a_j b_j)|";
        if (final_stage) last = std::move(samples);
    }
    if (prop5_medians.size() > 1) {
        double violations = 0;
        for (std::size_t k = 1; k < prop5_medians.size(); ++k) violations += prop5_medians[k] >= prop5_medians[k - 1];
        rep.add(row("lambda_median_decreasing", "conditioned type proportion", violations, 0.0,
                    opt.tolerance("lambda_median_decreasing", 0.0)))
            .note = "number of consecutive n where the median does not decrease";
    }
    const std::uint64_t n = n_values.back();
    {
        double outside = 0;
        for (const auto& s : last) outside += std::abs(s.ratio - 1.0 / a) > 0.25;
        auto& s = rep.add(row("size_ratio_outside", "conditioned size", outside / static_cast<double>(last.size()), 0.0,
                              opt.tolerance("size_ratio_outside", 0.05)));
        s.note = "fraction of replicas with |#T/n - 1/a_j| > 0.25";
        std::vector<double> ratio;
        for (const auto& x : last) ratio.push_back(x.ratio);
        rep.add(row("size_ratio_mean", "conditioned size", mean_of(ratio), 1.0 / a, 0.05 / a, true)).std_error =
            sd_of(ratio) / std::sqrt(static_cast<double>(ratio.size()));
    }
    {
        // Acceptance probabilities P(#T^(j) = m) from every attempt of the last sweep.
        std::vector<std::uint64_t> hist(n + 2, 0);
        std::uint64_t attempts = 0;
        for (const auto& s : last) {
            attempts += s.attempts;
            for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += s.hist[k];
        }
        rep.param("attempts", static_cast<std::int64_t>(attempts));
        std::vector<double> x, y;
        for (std::uint64_t m : {25u, 50u, 100u, 200u}) {
            if (m > n || !reach.contains(m) || hist[m] == 0) continue;
            x.push_back(std::log(static_cast<double>(m)));
            y.push_back(std::log(static_cast<double>(hist[m]) / static_cast<double>(attempts)));
        }
        auto& s = rep.add(row("acceptance_exponent", "conditioning probability", x.size() >= 2 ? ls_slope(x, y) : no_value,
                              -1.0 - 1.0 / alpha, opt.tolerance("acceptance_exponent", 0.2)));
        s.note = "fit over m in {25, 50, 100, 200} up to the largest n";
        rep.add(row("acceptance_rate_n" + std::to_string(n), "conditioning probability",
                    static_cast<double>(hist[n]) / static_cast<double>(attempts), no_value, no_value, true));
    }
    finish(rep, start, opt);
    return rep;
}

}  // namespace mgw
