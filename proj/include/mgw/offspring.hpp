#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mgw/rational.hpp"

namespace mgw {

enum class Family { finite_table, heavy_count, geometric };

std::string family_name(Family f);

struct TableEntry {
    std::vector<int> children;  // counts per type
    Rational prob;
    double value = 0.0;
};

struct FiniteTableLaw {
    std::vector<TableEntry> entries;
};

// Total count geometric: P(k) = (1 - p) p^k, every child of type child_type.
struct GeometricLaw {
    Rational p;
    int child_type = 1;
    double value = 0.0;
};

// N = 0 with probability 1 - p_positive, N = k >= 1 with probability
// C (k + k0)^(-1-alpha); each child independently gets type j with probability q_j.
class HeavyCountLaw {
public:
    HeavyCountLaw() = default;
    HeavyCountLaw(double alpha, double mean, double p_positive, std::vector<double> q);

    double alpha() const { return alpha_; }
    double mean() const { return mean_; }
    double p_positive() const { return p_positive_; }
    const std::vector<double>& q() const { return q_; }
    double scale() const { return c_; }
    double shift() const { return k0_; }

    double pmf(std::uint64_t k) const;
    // P(N >= k).
    double tail(std::uint64_t k) const;
    // E[1 - exp(-ell N)] for ell >= 0.
    double complement(double ell) const;

private:
    double alpha_ = 1.5;
    double mean_ = 1.0;
    double p_positive_ = 0.5;
    std::vector<double> q_;
    double c_ = 0.0;
    double k0_ = 0.0;
    std::shared_ptr<const std::vector<double>> table_;
};

struct TypeLaw {
    Family family = Family::finite_table;
    double alpha = 2.0;
    FiniteTableLaw table;
    GeometricLaw geometric;
    HeavyCountLaw heavy;
};

class OffspringSpec {
public:
    OffspringSpec() = default;
    OffspringSpec(int d, std::vector<TypeLaw> laws, std::vector<int> root_types, std::string name = "");

    static OffspringSpec from_json(const nlohmann::json& j);
    static OffspringSpec load(const std::string& path);
    nlohmann::json to_json() const;

    int d() const { return d_; }
    const std::string& name() const { return name_; }
    const TypeLaw& law(int i) const { return laws_.at(static_cast<std::size_t>(i - 1)); }
    const std::vector<int>& root_types() const { return root_types_; }

    // True when every law has rational probabilities (no heavy-count type).
    bool is_exact() const;
    // d = 2, type 1 geometric with type-2 children, type 2 only has type-1 children.
    bool is_alternating() const;

    Rational prob_exact(int i, const std::vector<int>& children) const;
    double prob(int i, const std::vector<int>& children) const;
    double prob_zero(int i) const;

private:
    void validate() const;

    int d_ = 0;
    std::vector<TypeLaw> laws_;
    std::vector<int> root_types_;
    std::string name_;
};

// Generating function E[prod_j x_j^{Z_j}] for x in [0, 1]^d.
double pgf_eval(const OffspringSpec& spec, int i, const std::vector<double>& x);
// psi(s) = -log E[exp(-<s, Z>)] for s >= 0.
double laplace_exponent(const OffspringSpec& spec, int i, const std::vector<double>& s);
// 1 - E[exp(-<s, Z>)], computed without cancellation.
double laplace_complement(const OffspringSpec& spec, int i, const std::vector<double>& s);

// Built-in reference laws.
OffspringSpec alternating_geometric_spec(const Rational& p1, const Rational& p2);
OffspringSpec monotype_geometric_spec(const Rational& p);
OffspringSpec monotype_table_spec(const std::vector<double>& pmf, const std::string& name = "table");

}  // namespace mgw
