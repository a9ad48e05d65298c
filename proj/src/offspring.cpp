#include "mgw/offspring.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>

#include "mgw/errors.hpp"

namespace mgw {

namespace {

constexpr std::size_t heavy_table_size = std::size_t{1} << 20;

// sum_{k >= 1} (k + a)^(-s)
double shifted_zeta(double s, double a) {
    gsl_sf_result r;
    int status = gsl_sf_hzeta_e(s, 1.0 + a, &r);
    if (status != GSL_SUCCESS) throw NumericalError("Hurwitz zeta evaluation failed");
    return r.val;
}

struct GslQuiet {
    GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet gsl_quiet;

Rational json_probability(const nlohmann::json& v, const std::string& what) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) return rational_from_double(v.get<double>());
    throw ValidationError(what + " must be a number or a string such as \"1/2\"");
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ValidationError("unknown key '" + it.key() + "' in " + where);
}

Family parse_family(const std::string& name) {
    if (name == "finite_table" || name == "FiniteTable") return Family::finite_table;
    if (name == "heavy_count" || name == "HeavyCount") return Family::heavy_count;
    if (name == "geometric" || name == "Geometric") return Family::geometric;
    throw ValidationError("unknown family '" + name + "'");
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::finite_table: return "finite_table";
        case Family::heavy_count: return "heavy_count";
        case Family::geometric: return "geometric";
    }
    return "?";
}

HeavyCountLaw::HeavyCountLaw(double alpha, double mean, double p_positive, std::vector<double> q)
    : alpha_(alpha), mean_(mean), p_positive_(p_positive), q_(std::move(q)) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw ValidationError("heavy_count needs alpha in (1, 2)");
    if (!(p_positive > 0.0 && p_positive <= 1.0)) throw ValidationError("heavy_count needs p_positive in (0, 1]");
    double qsum = 0.0;
    for (double x : q_) {
        if (!(x >= 0.0)) throw ValidationError("heavy_count type probabilities must be non-negative");
        qsum += x;
    }
    if (std::abs(qsum - 1.0) > 1e-12) throw ValidationError("heavy_count type probabilities must sum to 1");

    // E[N | N >= 1] as a function of the shift k0 increases from 1 (k0 -> -1) to infinity.
    const double target = mean / p_positive;
    auto ratio = [&](double k0) { return shifted_zeta(alpha, k0) / shifted_zeta(1.0 + alpha, k0) - k0; };
    double lo = -1.0 + 1e-9, hi = 1.0;
    if (!(target > ratio(lo))) throw ValidationError("heavy_count mean too small for p_positive");
    while (ratio(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericalError("heavy_count shift search diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
        double mid = 0.5 * (lo + hi);
        (ratio(mid) < target ? lo : hi) = mid;
    }
    k0_ = 0.5 * (lo + hi);
    c_ = p_positive / shifted_zeta(1.0 + alpha, k0_);

    auto table = std::make_shared<std::vector<double>>(heavy_table_size);
    (*table)[0] = 1.0 - p_positive;
    for (std::size_t k = 1; k < heavy_table_size; ++k)
        (*table)[k] = c_ * std::pow(static_cast<double>(k) + k0_, -1.0 - alpha);
    table_ = std::move(table);
}

double HeavyCountLaw::pmf(std::uint64_t k) const {
    if (k < table_->size()) return (*table_)[k];
    return c_ * std::pow(static_cast<double>(k) + k0_, -1.0 - alpha_);
}

double HeavyCountLaw::tail(std::uint64_t k) const {
    if (k == 0) return 1.0;
    return c_ * shifted_zeta(1.0 + alpha_, static_cast<double>(k - 1) + k0_);
}

double HeavyCountLaw::complement(double ell) const {
    if (ell <= 0.0) return 0.0;
    long double acc = 0.0L, comp = 0.0L;
    auto add = [&](long double term) {
        long double y = term - comp;
        long double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    };
    const auto& tab = *table_;
    std::uint64_t k = 1;
    for (; k < tab.size(); ++k) {
        double x = static_cast<double>(k) * ell;
        if (x > 45.0) break;
        add(static_cast<long double>(tab[k]) * static_cast<long double>(-std::expm1(-x)));
    }
    for (; static_cast<double>(k) * ell <= 45.0; ++k) add(static_cast<long double>(pmf(k)) * -std::expm1(-static_cast<double>(k) * ell));
    add(static_cast<long double>(tail(k)));
    return static_cast<double>(acc);
}

OffspringSpec::OffspringSpec(int d, std::vector<TypeLaw> laws, std::vector<int> root_types, std::string name)
    : d_(d), laws_(std::move(laws)), root_types_(std::move(root_types)), name_(std::move(name)) {
    for (auto& law : laws_) {
        for (auto& e : law.table.entries) e.value = to_double(e.prob);
        law.geometric.value = to_double(law.geometric.p);
    }
    validate();
}

void OffspringSpec::validate() const {
    if (d_ < 1) throw ValidationError("d must be at least 1");
    if (static_cast<int>(laws_.size()) != d_) throw ValidationError("one law per type is required");
    bool nondegenerate = false;
    for (int i = 1; i <= d_; ++i) {
        const TypeLaw& law = laws_[static_cast<std::size_t>(i - 1)];
        std::string who = "type " + std::to_string(i);
        if (!(law.alpha > 1.0 && law.alpha <= 2.0)) throw ValidationError(who + ": alpha must lie in (1, 2]");
        switch (law.family) {
            case Family::finite_table: {
                if (law.alpha != 2.0) throw ValidationError(who + ": finite tables have finite variance and must declare alpha = 2");
                if (law.table.entries.empty()) throw ValidationError(who + ": empty table");
                Rational total = 0;
                std::set<std::vector<int>> seen;
                for (const auto& e : law.table.entries) {
                    if (static_cast<int>(e.children.size()) != d_) throw ValidationError(who + ": child vectors need d entries");
                    for (int c : e.children)
                        if (c < 0) throw ValidationError(who + ": negative child count");
                    if (e.prob < 0) throw ValidationError(who + ": negative probability");
                    if (!seen.insert(e.children).second) throw ValidationError(who + ": repeated child vector");
                    total += e.prob;
                    int n = std::accumulate(e.children.begin(), e.children.end(), 0);
                    if (n != 1 && e.prob > 0) nondegenerate = true;
                }
                if (total != 1) throw ValidationError(who + ": table probabilities sum to " + format_rational(total) + ", not 1");
                break;
            }
            case Family::geometric:
                if (law.alpha != 2.0) throw ValidationError(who + ": geometric laws have finite variance and must declare alpha = 2");
                if (!(law.geometric.p > 0 && law.geometric.p < 1)) throw ValidationError(who + ": geometric p must lie in (0, 1)");
                if (law.geometric.child_type < 1 || law.geometric.child_type > d_)
                    throw ValidationError(who + ": geometric child_type outside [1, d]");
                nondegenerate = true;
                break;
            case Family::heavy_count:
                if (static_cast<int>(law.heavy.q().size()) != d_) throw ValidationError(who + ": q needs d entries");
                if (law.heavy.alpha() != law.alpha) throw ValidationError(who + ": heavy_count tail index must equal alpha");
                nondegenerate = true;
                break;
        }
    }
    if (!nondegenerate) throw ValidationError("degenerate offspring distribution: every type has exactly one child");
    if (root_types_.empty()) throw ValidationError("root_types must not be empty");
    for (int r : root_types_)
        if (r < 1 || r > d_) throw ValidationError("root type outside [1, d]");
}

OffspringSpec OffspringSpec::from_json(const nlohmann::json& j) {
    reject_unknown(j, {"d", "types", "root_types", "name", "description"}, "spec");
    if (!j.contains("d") || !j.contains("types")) throw ValidationError("spec needs 'd' and 'types'");
    int d = j.at("d").get<int>();
    if (d < 1) throw ValidationError("d must be at least 1");
    const auto& types = j.at("types");
    if (!types.is_array() || static_cast<int>(types.size()) != d) throw ValidationError("'types' must list d laws");
    std::vector<TypeLaw> laws;
    for (std::size_t t = 0; t < types.size(); ++t) {
        const auto& tj = types[t];
        std::string where = "types[" + std::to_string(t) + "]";
        reject_unknown(tj, {"family", "params", "alpha"}, where);
        TypeLaw law;
        law.family = parse_family(tj.at("family").get<std::string>());
        law.alpha = tj.contains("alpha") ? tj.at("alpha").get<double>() : 2.0;
        const auto& params = tj.at("params");
        switch (law.family) {
            case Family::finite_table: {
                reject_unknown(params, {"table"}, where + ".params");
                for (const auto& row : params.at("table")) {
                    reject_unknown(row, {"children", "prob"}, where + ".params.table[]");
                    TableEntry e;
                    e.children = row.at("children").get<std::vector<int>>();
                    e.prob = json_probability(row.at("prob"), where + " probability");
                    law.table.entries.push_back(std::move(e));
                }
                break;
            }
            case Family::geometric:
                reject_unknown(params, {"p", "child_type"}, where + ".params");
                law.geometric.p = json_probability(params.at("p"), where + ".p");
                law.geometric.child_type = params.contains("child_type") ? params.at("child_type").get<int>() : 1;
                break;
            case Family::heavy_count: {
                reject_unknown(params, {"mean", "p_positive", "q"}, where + ".params");
                std::vector<double> q = params.contains("q") ? params.at("q").get<std::vector<double>>()
                                                             : std::vector<double>(static_cast<std::size_t>(d), 1.0 / d);
                double mean = params.contains("mean") ? params.at("mean").get<double>() : 1.0;
                law.heavy = HeavyCountLaw(law.alpha, mean, params.at("p_positive").get<double>(), std::move(q));
                break;
            }
        }
        laws.push_back(std::move(law));
    }
    std::vector<int> roots = j.contains("root_types") ? j.at("root_types").get<std::vector<int>>() : std::vector<int>{1};
    std::string name = j.contains("name") ? j.at("name").get<std::string>() : "";
    return OffspringSpec(d, std::move(laws), std::move(roots), std::move(name));
}

OffspringSpec OffspringSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open spec file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("spec file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("spec file '" + path + "': " + e.what());
    }
}

nlohmann::json OffspringSpec::to_json() const {
    nlohmann::json j;
    j["d"] = d_;
    if (!name_.empty()) j["name"] = name_;
    j["root_types"] = root_types_;
    nlohmann::json types = nlohmann::json::array();
    for (const auto& law : laws_) {
        nlohmann::json t;
        t["family"] = family_name(law.family);
        t["alpha"] = law.alpha;
        switch (law.family) {
            case Family::finite_table: {
                nlohmann::json rows = nlohmann::json::array();
                for (const auto& e : law.table.entries) rows.push_back({{"children", e.children}, {"prob", format_rational(e.prob)}});
                t["params"] = {{"table", rows}};
                break;
            }
            case Family::geometric:
                t["params"] = {{"p", format_rational(law.geometric.p)}, {"child_type", law.geometric.child_type}};
                break;
            case Family::heavy_count:
                t["params"] = {{"mean", law.heavy.mean()}, {"p_positive", law.heavy.p_positive()}, {"q", law.heavy.q()}};
                break;
        }
        types.push_back(t);
    }
    j["types"] = types;
    return j;
}

bool OffspringSpec::is_exact() const {
    for (const auto& law : laws_)
        if (law.family == Family::heavy_count) return false;
    return true;
}

bool OffspringSpec::is_alternating() const {
    if (d_ != 2) return false;
    const TypeLaw& a = laws_[0];
    const TypeLaw& b = laws_[1];
    if (a.family != Family::geometric || a.geometric.child_type != 2) return false;
    switch (b.family) {
        case Family::geometric: return b.geometric.child_type == 1;
        case Family::finite_table:
            for (const auto& e : b.table.entries)
                if (e.children[1] != 0 && e.prob != 0) return false;
            return true;
        case Family::heavy_count: return b.heavy.q()[1] == 0.0;
    }
    return false;
}

Rational OffspringSpec::prob_exact(int i, const std::vector<int>& children) const {
    const TypeLaw& law = this->law(i);
    switch (law.family) {
        case Family::finite_table:
            for (const auto& e : law.table.entries)
                if (e.children == children) return e.prob;
            return 0;
        case Family::geometric: {
            int total = 0;
            for (int t = 1; t <= d_; ++t) {
                int c = children[static_cast<std::size_t>(t - 1)];
                if (t != law.geometric.child_type && c != 0) return 0;
                total += c;
            }
            Rational pk = 1;
            for (int k = 0; k < total; ++k) pk *= law.geometric.p;
            return (1 - law.geometric.p) * pk;
        }
        case Family::heavy_count: throw DomainError("heavy-count probabilities are not rational");
    }
    return 0;
}

double OffspringSpec::prob(int i, const std::vector<int>& children) const {
    const TypeLaw& law = this->law(i);
    switch (law.family) {
        case Family::finite_table:
            for (const auto& e : law.table.entries)
                if (e.children == children) return e.value;
            return 0.0;
        case Family::geometric: {
            int total = 0;
            for (int t = 1; t <= d_; ++t) {
                int c = children[static_cast<std::size_t>(t - 1)];
                if (t != law.geometric.child_type && c != 0) return 0.0;
                total += c;
            }
            return (1.0 - law.geometric.value) * std::pow(law.geometric.value, total);
        }
        case Family::heavy_count: {
            int total = 0;
            double multinom = 1.0;
            for (int t = 1; t <= d_; ++t) {
                int c = children[static_cast<std::size_t>(t - 1)];
                total += c;
                multinom *= std::pow(law.heavy.q()[static_cast<std::size_t>(t - 1)], c) / std::tgamma(c + 1.0);
            }
            return law.heavy.pmf(static_cast<std::uint64_t>(total)) * std::tgamma(total + 1.0) * multinom;
        }
    }
    return 0.0;
}

double OffspringSpec::prob_zero(int i) const { return prob(i, std::vector<int>(static_cast<std::size_t>(d_), 0)); }

double pgf_eval(const OffspringSpec& spec, int i, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != spec.d()) throw ValidationError("pgf argument needs d coordinates");
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("pgf argument outside [0, 1]^d");
    const TypeLaw& law = spec.law(i);
    switch (law.family) {
        case Family::finite_table: {
            double s = 0.0;
            for (const auto& e : law.table.entries) {
                double term = e.value;
                for (std::size_t t = 0; t < x.size(); ++t) term *= std::pow(x[t], e.children[t]);
                s += term;
            }
            return s;
        }
        case Family::geometric: {
            double p = law.geometric.value;
            return (1.0 - p) / (1.0 - p * x[static_cast<std::size_t>(law.geometric.child_type - 1)]);
        }
        case Family::heavy_count: {
            double y = 0.0;
            for (std::size_t t = 0; t < x.size(); ++t) y += law.heavy.q()[t] * x[t];
            if (y <= 0.0) return 1.0 - law.heavy.p_positive();
            return 1.0 - law.heavy.complement(-std::log(y));
        }
    }
    return 0.0;
}

double laplace_complement(const OffspringSpec& spec, int i, const std::vector<double>& s) {
    if (static_cast<int>(s.size()) != spec.d()) throw ValidationError("Laplace argument needs d coordinates");
    for (double v : s)
        if (!(v >= 0.0)) throw DomainError("Laplace argument must be non-negative");
    const TypeLaw& law = spec.law(i);
    switch (law.family) {
        case Family::finite_table: {
            long double acc = 0.0L;
            for (const auto& e : law.table.entries) {
                double dot = 0.0;
                for (std::size_t t = 0; t < s.size(); ++t) dot += s[t] * e.children[t];
                acc += static_cast<long double>(e.value) * -std::expm1(-dot);
            }
            return static_cast<double>(acc);
        }
        case Family::geometric: {
            double p = law.geometric.value;
            double u = -std::expm1(-s[static_cast<std::size_t>(law.geometric.child_type - 1)]);
            return p * u / ((1.0 - p) + p * u);
        }
        case Family::heavy_count: {
            double w = 0.0;
            for (std::size_t t = 0; t < s.size(); ++t) w += law.heavy.q()[t] * -std::expm1(-s[t]);
            return law.heavy.complement(-std::log1p(-w));
        }
    }
    return 0.0;
}

double laplace_exponent(const OffspringSpec& spec, int i, const std::vector<double>& s) {
    return -std::log1p(-laplace_complement(spec, i, s));
}

OffspringSpec alternating_geometric_spec(const Rational& p1, const Rational& p2) {
    TypeLaw a, b;
    a.family = b.family = Family::geometric;
    a.geometric.p = p1;
    a.geometric.child_type = 2;
    b.geometric.p = p2;
    b.geometric.child_type = 1;
    return OffspringSpec(2, {a, b}, {1}, "alternating_geometric");
}

OffspringSpec monotype_geometric_spec(const Rational& p) {
    TypeLaw a;
    a.family = Family::geometric;
    a.geometric.p = p;
    a.geometric.child_type = 1;
    return OffspringSpec(1, {a}, {1}, "monotype_geometric");
}

OffspringSpec monotype_table_spec(const std::vector<double>& pmf, const std::string& name) {
    TypeLaw a;
    a.family = Family::finite_table;
    Rational rest = 1;
    for (std::size_t k = 1; k < pmf.size(); ++k) {
        if (pmf[k] <= 0.0) continue;
        TableEntry e;
        e.children = {static_cast<int>(k)};
        e.prob = Rational(pmf[k]);
        rest -= e.prob;
        a.table.entries.push_back(std::move(e));
    }
    if (rest < 0) throw ValidationError("table masses exceed 1");
    TableEntry zero;
    zero.children = {0};
    zero.prob = rest;
    a.table.entries.insert(a.table.entries.begin(), std::move(zero));
    return OffspringSpec(1, {a}, {1}, name);
}

}  // namespace mgw
