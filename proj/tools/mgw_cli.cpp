#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mgw/constants.hpp"
#include "mgw/errors.hpp"
#include "mgw/experiments.hpp"
#include "mgw/oracle.hpp"
#include "mgw/projection.hpp"
#include "mgw/sampler.hpp"
#include "mgw/spectral.hpp"

namespace {

using namespace mgw;
using nlohmann::json;

enum Exit { ok = 0, invalid = 1, rejected = 2, budget = 3 };

struct Options {
    std::string config;
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
    std::string csv;
    std::string in;
    std::string counters;
    std::string experiment;
    std::string file;
    int type = 0;
    std::vector<std::uint64_t> n;
    std::uint64_t replicas = 0;
    std::uint64_t max_vertices = 50'000'000;
    std::size_t max_size = 0;
    std::optional<std::size_t> max_children;
    std::vector<std::string> tolerances;
    bool timing = false;
    bool as_json = false;
};

const std::vector<std::string> experiment_names = {"types_convergence",   "height_coupling", "max_height_tail",
                                                   "upsilon_scaling",     "nij_moments",     "size_tail_exponent",
                                                   "conditioned_profile"};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

OffspringSpec load_spec(const Options& o) {
    if (o.spec_path.empty()) return alternating_geometric_spec(Rational(1, 2), Rational(1, 2));
    return OffspringSpec::load(o.spec_path);
}

std::uint64_t resolve_seed(const Options& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("MGW_SEED")) {
        std::string text = env;
        std::size_t used = 0;
        std::uint64_t value = 0;
        try {
            value = std::stoull(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size()) throw ValidationError("MGW_SEED is not an unsigned integer: " + text);
        return value;
    }
    return default_seed;
}

// Forest files carry an optional "# d=K" header so that type counts survive a round trip.
std::string forest_text(const Forest& f) { return "# d=" + std::to_string(f.d()) + "\n" + dump_text(f); }

Forest read_forest(const std::string& path) {
    std::string text = read_file(path);
    int d = 0;
    if (text.rfind("# d=", 0) == 0) d = std::atoi(text.c_str() + 4);
    return load_text(text, d);
}

std::string vector_text(const std::vector<double>& v) {
    std::ostringstream s;
    s.precision(17);
    s << "(";
    for (std::size_t k = 0; k < v.size(); ++k) s << (k ? ", " : "") << v[k];
    return s.str() + ")";
}

int spec_check(const Options& o) {
    auto spec = load_spec(o);
    auto m = mean_matrix(spec);
    bool irreducible = is_irreducible(m);
    double rho = spectral_radius(m);
    std::ostringstream s;
    s.precision(17);
    s << "name: " << spec.name() << "\n";
    s << "d: " << spec.d() << "\n";
    s << "M:\n";
    for (const auto& r : m) s << "  " << vector_text(r) << "\n";
    s << "rho: " << rho << "\n";
    std::string classification = criticality_name(classify(rho)) + ", " + (irreducible ? "irreducible" : "reducible");
    if (irreducible) {
        auto p = perron(m);
        s << "a: " << vector_text(p.a) << "\n";
        s << "b: " << vector_text(p.b) << "\n";
        if (classify(p.rho) == Criticality::critical) {
            auto c = limit_constants(spec);
            s << "alpha_min: " << c.alpha_min << "\n";
            s << "cbar: " << c.cbar << "\n";
            s << "cbar_method: " << c.method << "\n";
        }
    }
    s << "classification: " << classification << "\n";
    write_output(o.out, s.str());
    return ok;
}

int sample(const Options& o) {
    auto spec = load_spec(o);
    check_not_supercritical(spec);
    const std::uint64_t components = o.n.empty() ? 1 : o.n.front();
    if (components < 1) throw RangeError("--n must be at least 1");
    std::vector<int> roots = spec.root_types();
    if (o.type) roots = {o.type};
    if (roots.empty()) roots = {1};
    for (int r : roots)
        if (r < 1 || r > spec.d()) throw RangeError("root type outside [1, d]");
    ChildSampler sampler(spec);
    ForestGrower g(sampler, roots, components == 1);
    Rng rng(resolve_seed(o));
    do {
        if (g.forest().size() >= o.max_vertices) throw BudgetError("sample exceeded --max-vertices");
        g.step(rng);
    } while (!(g.between_components() && g.forest().components() == components));
    write_output(o.out, forest_text(g.forest()));
    return ok;
}

int project_cmd(const Options& o) {
    Forest f = read_forest(o.in);
    auto p = project(f, o.type ? o.type : 1);
    write_output(o.out, forest_text(p.reduced));
    if (!o.counters.empty()) {
        std::ostringstream s;
        s << "vertex_index,j,N_ij\n";
        const std::size_t w = p.others.size();
        for (std::size_t u = 0; u < p.reduced.size(); ++u)
            for (std::size_t k = 0; k < w; ++k) s << u << ',' << p.others[k] << ',' << p.n_counters[u * w + k] << "\n";
        write_output(o.counters, s.str());
    }
    return ok;
}

int oracle_enumerate(const Options& o) {
    auto spec = load_spec(o);
    int root = o.type ? o.type : (spec.root_types().empty() ? 1 : spec.root_types().front());
    auto law = enumerate_trees(spec, root, o.max_size, o.max_children);
    std::ostringstream s;
    s << "tree,size,probability,exact\n";
    char buf[40];
    for (const auto& e : law.entries) {
        std::string tree = dump_text(e.tree);
        tree.pop_back();
        for (char& c : tree)
            if (c == '\n') c = ';';
        std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(e.value));
        s << tree << ',' << e.tree.size() << ',' << buf << ',' << (law.exact ? format_rational(e.exact) : std::string()) << "\n";
    }
    write_output(o.out, s.str());
    return ok;
}

int experiment(const Options& o) {
    auto spec = load_spec(o);
    RunOptions run;
    run.seed = resolve_seed(o);
    run.workers = std::max(1u, o.workers);
    run.timing = o.timing;
    run.max_vertices = o.max_vertices;
    for (const auto& t : o.tolerances) {
        auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("--tolerance expects label=value, got " + t);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t.substr(eq + 1), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != t.size() - eq - 1 || !(v >= 0.0)) throw ValidationError("bad tolerance value in " + t);
        run.tolerances[t.substr(0, eq)] = v;
    }
    const int i = o.type ? o.type : 1;
    auto ns = [&](std::vector<std::uint64_t> fallback) { return o.n.empty() ? fallback : o.n; };
    auto n1 = [&](std::uint64_t fallback) {
        if (o.n.size() > 1) throw ValidationError(o.experiment + " takes a single --n");
        return o.n.empty() ? fallback : o.n.front();
    };
    auto reps = [&](std::uint64_t fallback) { return o.replicas ? o.replicas : fallback; };

    ExperimentReport rep;
    const std::string& e = o.experiment;
    if (e == "types_convergence")
        rep = types_convergence(spec, i, n1(100'000), reps(50), run);
    else if (e == "height_coupling")
        rep = height_coupling(spec, i, ns({1'000, 10'000, 100'000}), reps(50), run);
    else if (e == "max_height_tail")
        rep = max_height_tail(spec, i, ns({128}), reps(1'000'000), run);
    else if (e == "upsilon_scaling")
        rep = upsilon_scaling(spec, i, n1(100'000), reps(500), run);
    else if (e == "nij_moments")
        rep = nij_moments(spec, i, n1(100'000), run);
    else if (e == "size_tail_exponent")
        rep = size_tail_exponent(spec, i, ns({25, 50, 100, 200}), reps(1'000'000), run);
    else
        rep = conditioned_profile(spec, i, ns({50, 100, 200}), reps(300), run);
    write_output(o.out, rep.to_json());
    if (!o.csv.empty()) write_output(o.csv, rep.to_csv());
    return rep.passed() ? ok : rejected;
}

int dump(const Options& o) {
    Forest f = read_forest(o.file);
    json j;
    j["d"] = f.d();
    j["tree"] = f.is_tree();
    j["vertices"] = f.size();
    j["components"] = f.components();
    std::vector<std::size_t> counts;
    std::uint32_t height = 0;
    for (int t = 1; t <= f.d(); ++t) counts.push_back(f.count_type(t));
    for (std::size_t v = 0; v < f.size(); ++v) height = std::max(height, f.depth(v));
    j["type_counts"] = counts;
    j["height"] = f.empty() ? json(nullptr) : json(height);
    if (o.as_json) {
        json list = json::array();
        for (std::size_t v = 0; v < f.size(); ++v) list.push_back({format_label(f.label(v)), f.type(v)});
        j["labels"] = std::move(list);
    }
    write_output(o.out, j.dump(2) + "\n");
    return ok;
}

int load(const Options& o) {
    write_output(o.out, forest_text(read_forest(o.file)));
    return ok;
}

// Appends "--key value" for every config entry the command line does not set.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
    }
    if (path.empty()) return args;
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    auto given = [&](const std::string& flag) {
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
        return false;
    };
    auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_float()) return v.dump();
        throw ValidationError("config values must be strings, numbers, booleans or arrays");
    };
    for (const auto& [key, value] : cfg.items()) {
        if (key == "config") throw ValidationError("config files cannot nest --config");
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& item : value) {
                args.push_back(flag);
                args.push_back(scalar(item));
            }
        } else {
            args.push_back(flag);
            args.push_back(scalar(value));
        }
    }
    return args;
}

int run(int argc, char** argv) {
    CLI::App app{"Multitype Galton-Watson trees: sampling, projection, exact laws and experiments", "mgw"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) { c->add_option("--config", o.config, "JSON file with option values"); };
    auto seed_opt = [&](CLI::App* c) { c->add_option("--seed", o.seed, "master seed (default: MGW_SEED, then 20240917)"); };

    auto* spec = app.add_subcommand("spec", "inspect an offspring spec");
    spec->require_subcommand(1);
    auto* check = spec->add_subcommand("check", "print mean matrix, Perron data and constants");
    check->add_option("--spec", o.spec_path, "spec JSON (default: alternating Geometric(1/2))");
    check->add_option("--out", o.out);
    common(check);

    auto* smp = app.add_subcommand("sample", "sample a tree (--n 1) or a forest of --n components");
    smp->add_option("--spec", o.spec_path);
    smp->add_option("--n", o.n, "number of components")->expected(1);
    smp->add_option("--root-type,--type", o.type, "root type (default: the root types listed in --spec)");
    smp->add_option("--max-vertices", o.max_vertices);
    smp->add_option("--out", o.out);
    seed_opt(smp);
    common(smp);

    auto* prj = app.add_subcommand("project", "delete every vertex whose type is not --type");
    prj->add_option("--in", o.in)->required();
    prj->add_option("--type", o.type)->required();
    prj->add_option("--out", o.out);
    prj->add_option("--counters", o.counters, "CSV of deleted-vertex counters per reduced vertex");
    common(prj);

    auto* orc = app.add_subcommand("oracle", "exact laws");
    orc->require_subcommand(1);
    auto* enm = orc->add_subcommand("enumerate", "every tree up to --max-size vertices with its probability");
    enm->add_option("--spec", o.spec_path);
    enm->add_option("--root-type,--type", o.type, "root type");
    enm->add_option("--max-size", o.max_size)->required();
    enm->add_option("--max-children", o.max_children);
    enm->add_option("--out", o.out);
    common(enm);

    auto* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment and write its report");
    exp->add_option("name", o.experiment)->required()->check(CLI::IsMember(experiment_names));
    exp->add_option("--spec", o.spec_path);
    exp->add_option("--type", o.type, "kept type i (or counted type j)");
    exp->add_option("--n", o.n, "size or list of sizes");
    exp->add_option("--replicas", o.replicas);
    exp->add_option("--workers", o.workers)->check(CLI::PositiveNumber);
    exp->add_option("--out", o.out, "JSON report (default: stdout)");
    exp->add_option("--csv", o.csv, "CSV statistics");
    exp->add_option("--tolerance", o.tolerances, "label=value override");
    exp->add_option("--max-vertices", o.max_vertices);
    exp->add_flag("--timing", o.timing, "include runtime_seconds in the report");
    seed_opt(exp);
    common(exp);

    auto* dmp = app.add_subcommand("dump", "summarize a forest file as JSON");
    dmp->add_option("file", o.file)->required();
    dmp->add_flag("--labels", o.as_json, "include every label and type");
    dmp->add_option("--out", o.out);
    common(dmp);

    auto* ld = app.add_subcommand("load", "validate a forest file and print its canonical form");
    ld->add_option("file", o.file)->required();
    ld->add_option("--out", o.out);
    common(ld);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return invalid;
    }

    if (*check) return spec_check(o);
    if (*smp) return sample(o);
    if (*prj) return project_cmd(o);
    if (*enm) return oracle_enumerate(o);
    if (*exp) return experiment(o);
    if (*dmp) return dump(o);
    return load(o);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mgw::BudgetError& e) {
        std::cerr << "mgw: budget exhausted: " << e.what() << "\n";
        return budget;
    } catch (const mgw::Error& e) {
        std::cerr << "mgw: " << e.what() << "\n";
        return invalid;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "mgw: " << e.what() << "\n";
        return invalid;
    }
}
