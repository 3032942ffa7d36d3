#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gexp/axioms.hpp"
#include "gexp/characterization.hpp"
#include "gexp/gexp.hpp"
#include "gexp/io.hpp"

namespace fs = std::filesystem;
using gexp::io::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct Flags {
    std::string config;
    std::string out;
    std::string lambda_grid;
    std::string phi_family;
    std::string phi;
    std::string f_override;
    double sigma_low = 0.0;
    double sigma_bar = 0.0;
    double a = 0.0;
    double b = 0.0;
    long long seed = 0;
    int oracle_steps = 0;
    int cases = 0;
};

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = item.find_last_not_of(" \t");
        const std::string trimmed = item.substr(first, last - first + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(trimmed, &used);
        } catch (const std::exception&) {
            throw gexp::ValidationError("lambda grid: not a number: '" + trimmed + "'");
        }
        if (used != trimmed.size() || !std::isfinite(v))
            throw gexp::ValidationError("lambda grid: not a number: '" + trimmed + "'");
        out.push_back(v);
    }
    return out;
}

/// Typed view of the merged config object.
class Params {
public:
    explicit Params(json j) : j_(std::move(j)) {
        if (!j_.is_object()) throw gexp::ValidationError("config: top level must be a table/object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_number()) throw gexp::ValidationError("config: '" + key + "' must be a number");
        const double v = j_[key].get<double>();
        if (!std::isfinite(v)) throw gexp::ValidationError("config: '" + key + "' must be finite");
        return v;
    }

    long long integer(const std::string& key, long long fallback, long long lo, long long hi) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_number_integer()) throw gexp::ValidationError("config: '" + key + "' must be an integer");
        const auto v = j_[key].get<long long>();
        if (v < lo || v > hi)
            throw gexp::ValidationError("config: '" + key + "' out of range [" + std::to_string(lo) + ", " +
                                        std::to_string(hi) + "]");
        return v;
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!j_[key].is_string()) throw gexp::ValidationError("config: '" + key + "' must be a string");
        return j_[key].get<std::string>();
    }

    std::optional<std::vector<double>> lambda_grid() const {
        if (!has("lambda_grid")) return std::nullopt;
        const auto& v = j_["lambda_grid"];
        if (v.is_string()) return parse_number_list(v.get<std::string>());
        if (!v.is_array()) throw gexp::ValidationError("config: 'lambda_grid' must be an array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw gexp::ValidationError("config: 'lambda_grid' entries must be numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json& raw(const std::string& key) const { return j_.at(key); }

    gexp::SolverSettings solver() const {
        gexp::SolverSettings s;
        s.n_points = static_cast<int>(integer("n_points", s.n_points, 3, 200001));
        s.cfl_fraction = number("cfl", s.cfl_fraction);
        s.half_width_sigmas = number("half_width", s.half_width_sigmas);
        if (s.n_points % 2 == 0) throw gexp::ValidationError("config: 'n_points' must be odd");
        if (!(s.cfl_fraction > 0.0 && s.cfl_fraction <= 0.5)) throw gexp::ValidationError("config: 'cfl' must lie in (0, 0.5]");
        if (!(s.half_width_sigmas > 0.0)) throw gexp::ValidationError("config: 'half_width' must be positive");
        return s;
    }

    gexp::GFunction1D g() const { return {number("sigma_low", 0.5), number("sigma_bar", 1.0)}; }

    /// Law named by `key` if configured, otherwise the G-normal law from sigma_low/sigma_bar.
    gexp::SublinearDistribution law(const std::string& key) const {
        if (has(key)) return gexp::io::distribution_from_json(raw(key), solver());
        return gexp::SublinearDistribution(gexp::GNormal{g(), 0.0, solver()});
    }

    fs::path out_dir() const { return text("out", "out"); }

private:
    json j_;
};

std::function<double(double)> f_by_name(const std::string& name) {
    if (name == "1-abs") return [](double l) { return 1.0 - std::abs(l); };
    if (name == "const" || name == "one") return [](double) { return 1.0; };
    if (name == "sqrt") return [](double l) { return std::sqrt(1.0 - l * l); };
    throw gexp::ValidationError("unknown f_override '" + name + "' (known: sqrt, 1-abs, const)");
}

std::vector<gexp::TestFunction> family_by_name(const std::string& spec, double scale) {
    if (spec.empty() || spec == "canonical") return gexp::phi::canonical_family(scale);
    std::vector<gexp::TestFunction> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto f = gexp::phi::by_name(item);
        if (!f) throw gexp::ValidationError("unknown test function '" + item + "'");
        out.push_back(*f);
    }
    if (out.empty()) throw gexp::ValidationError("phi_family is empty");
    return out;
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw gexp::ValidationError("cannot write " + path.string());
    os << body;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_report_csv(const fs::path& path, const gexp::InvarianceReport& rep) {
    std::ostringstream os;
    gexp::io::write_report_csv(os, rep);
    write_text(path, os.str());
}

fs::path prepare_out(const Params& p) {
    const auto dir = p.out_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw gexp::ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

int print_result(const std::string& what, bool pass, double value) {
    std::cout << what << ": " << (pass ? "PASS" : "FAIL") << " (" << gexp::io::format_double(value) << ")\n";
    return pass ? kExitPass : kExitFail;
}

int cmd_gheat(const Params& p) {
    const auto g = p.g();
    const auto s = p.solver();
    const double t = p.number("t", 1.0);
    const auto phi = gexp::phi::by_name(p.text("phi", "x2"));
    if (!phi) throw gexp::ValidationError("unknown phi '" + p.text("phi", "") + "'");
    const auto grid = gexp::default_grid(g, t, s.n_points, s.cfl_fraction, s.half_width_sigmas);

    const auto start = std::chrono::steady_clock::now();
    const auto u = gexp::solve_gheat(g, *phi, grid);
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto dir = prepare_out(p);
    std::ostringstream csv;
    gexp::io::write_grid_function_csv(csv, u);
    write_text(dir / "gheat.csv", csv.str());
    json summary{{"phi", phi->name()},
                 {"sigma_low", g.sigma_low()},
                 {"sigma_bar", g.sigma_bar()},
                 {"value_at_zero", u.at_zero()},
                 {"grid", gexp::io::to_json(grid)},
                 {"runtime", runtime}};
    const int steps = static_cast<int>(p.integer("oracle_steps", 0, 0, 1000000));
    if (steps > 0) summary["dp_oracle"] = gexp::dp_oracle(g, *phi, t, steps);
    write_json(dir / "gheat.json", summary);
    std::cout << "value_at_zero = " << gexp::io::format_double(u.at_zero()) << "\n";
    return kExitPass;
}

int cmd_moments(const Params& p) {
    const auto law = p.law("x");
    const auto m = gexp::moment_summary(law);
    const auto dir = prepare_out(p);
    write_json(dir / "moments.json",
               {{"law", law.describe()}, {"moments", gexp::io::to_json(m)}, {"degenerate", gexp::is_degenerate(law)}});
    std::cout << gexp::io::to_json(m).dump() << "\n";
    return kExitPass;
}

int cmd_axioms(const Params& p) {
    const auto seed = static_cast<std::uint64_t>(p.integer("seed", 20240101, 0, std::numeric_limits<long long>::max()));
    const int cases = static_cast<int>(p.integer("cases", 1000, 1, 10000000));
    const double tol = p.number("tolerance", 1e-10);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> n_measures(1, 4), n_atoms(1, 5);
    std::uniform_real_distribution<double> value(-3.0, 3.0), weight(0.05, 1.0);
    const auto family = gexp::phi::canonical_family(1.0);
    const std::vector<double> constants{-2.0, 0.0, 0.5, 3.0};

    json violations = json::array();
    for (int c = 0; c < cases; ++c) {
        std::vector<gexp::DiscreteMeasure> measures(n_measures(rng));
        for (auto& m : measures) {
            m.resize(n_atoms(rng));
            double total = 0.0;
            for (auto& atom : m) {
                atom = {value(rng), weight(rng)};
                total += atom.weight;
            }
            for (auto& atom : m) atom.weight /= total;
        }
        const gexp::ScenarioSet set(std::move(measures));
        for (const auto& v : gexp::check_axioms(set, family, constants, tol))
            violations.push_back({{"case", c}, {"axiom", gexp::to_string(v.axiom)}, {"detail", v.detail}, {"excess", v.excess}});
    }
    const bool pass = violations.empty();
    const auto dir = prepare_out(p);
    write_json(dir / "axioms.json", {{"seed", seed},
                                     {"cases", cases},
                                     {"tolerance", tol},
                                     {"violations", violations},
                                     {"result", pass ? "PASS" : "FAIL"}});
    return print_result("axioms", pass, static_cast<double>(violations.size()));
}

int cmd_scan(const Params& p) {
    const auto x = p.law("x");
    const auto y = p.has("y") ? p.law("y") : x;
    const auto f = f_by_name(p.text("f_override", "sqrt"));
    const auto grid = p.lambda_grid().value_or(gexp::default_lambda_grid());
    const double scale = p.number("family_scale", gexp::law_scale(x));
    const auto family = family_by_name(p.text("phi_family", "canonical"), scale);
    const auto ref_name = p.text("reference", "x");
    gexp::ReferenceKind ref;
    if (ref_name == "x") ref = gexp::ReferenceKind::X;
    else if (ref_name == "lambda0") ref = gexp::ReferenceKind::LambdaZero;
    else throw gexp::ValidationError("reference must be 'x' or 'lambda0'");

    const auto rep = gexp::invariance_scan(x, y, f, grid, family, ref);
    const double threshold = p.number("threshold", gexp::kLawEqualityThreshold);
    const bool pass = rep.max_deviation <= threshold;
    const auto dir = prepare_out(p);
    auto j = gexp::io::to_json(rep);
    j["threshold"] = threshold;
    j["result"] = pass ? "PASS" : "FAIL";
    write_json(dir / "scan.json", j);
    write_report_csv(dir / "scan.csv", rep);
    return print_result("scan", pass, rep.max_deviation);
}

gexp::VerifyConfig verify_config(const Params& p) {
    gexp::VerifyConfig cfg;
    cfg.lambda_grid = p.lambda_grid();
    cfg.threshold = p.number("threshold", gexp::kLawEqualityThreshold);
    if (p.has("family_scale")) cfg.family_scale = p.number("family_scale", 1.0);
    cfg.solver = p.solver();
    if (p.has("f_override")) {
        cfg.f_description = p.text("f_override", "");
        cfg.f_override = f_by_name(cfg.f_description);
    }
    return cfg;
}

int cmd_thm1(const Params& p) {
    const auto cfg = verify_config(p);
    const auto rep = gexp::verify_theorem1(p.law("x"), cfg);
    const auto dir = prepare_out(p);
    auto j = gexp::io::to_json(rep);
    if (!cfg.f_description.empty()) j["f_override"] = cfg.f_description;
    write_json(dir / "thm1.json", j);
    write_report_csv(dir / "thm1.csv", rep.scan);
    return print_result("theorem1", rep.pass, rep.scan.max_deviation);
}

int cmd_thm2(const Params& p) {
    const auto cfg = verify_config(p);
    const double a = p.number("a", 1.0), b = p.number("b", 4.0);
    std::optional<gexp::SublinearDistribution> y;
    if (p.has("y")) y = p.law("y");
    const auto rep = gexp::verify_theorem2(p.g(), a, b, cfg, y);
    const auto dir = prepare_out(p);
    auto j = gexp::io::to_json(rep);
    if (!cfg.f_description.empty()) j["f_override"] = cfg.f_description;
    write_json(dir / "thm2.json", j);
    write_report_csv(dir / "thm2.csv", rep.scan);
    const double worst = std::max({rep.scan.max_deviation, rep.endpoint_distance, rep.max_rescaling_deviation});
    return print_result("theorem2", rep.pass, worst);
}

/// Runs the negative controls; PASS means every control is rejected with the
/// required margin.
int cmd_control(const Params& p) {
    const auto cfg = verify_config(p);
    const double margin = gexp::kControlMarginFactor * cfg.threshold;
    const auto grid = cfg.lambda_grid.value_or(gexp::default_lambda_grid());
    const auto x = p.law("x");
    const double scale = cfg.family_scale.value_or(gexp::law_scale(x));
    const auto family = gexp::phi::canonical_family(scale);

    const auto ms = gexp::moment_summary(x);
    const double hi = std::sqrt(ms.var_bar), lo = std::sqrt(ms.var_low);
    const gexp::SublinearDistribution two_point(
        gexp::ScenarioSet({{{-hi, 0.5}, {hi, 0.5}}, {{-lo, 0.5}, {lo, 0.5}}}));

    const auto converse = gexp::invariance_scan(two_point, two_point, f_by_name("sqrt"), grid, family,
                                                gexp::ReferenceKind::X);
    const auto linear = gexp::invariance_scan(x, x, f_by_name("1-abs"), grid, family, gexp::ReferenceKind::X);
    const auto constant =
        gexp::invariance_scan(x, x, f_by_name("const"), grid, family, gexp::ReferenceKind::LambdaZero);
    const auto probe = gexp::contradiction_probe_means({1.0, -1.0, 4.0, 1.0}, p.number("alpha", 0.5));

    const auto entry = [&](const gexp::InvarianceReport& r) {
        return json{{"max_deviation", r.max_deviation}, {"rejected", r.max_deviation >= margin}};
    };
    const bool pass = converse.max_deviation >= margin && linear.max_deviation >= margin &&
                      constant.max_deviation >= margin && probe.contradiction;
    const auto dir = prepare_out(p);
    write_json(dir / "control.json", {{"margin", margin},
                                      {"two_point", entry(converse)},
                                      {"f_one_minus_abs", entry(linear)},
                                      {"f_constant", entry(constant)},
                                      {"contradiction_probe", {{"branch", gexp::to_string(probe.branch)},
                                                               {"lhs", probe.lhs},
                                                               {"rhs", probe.rhs},
                                                               {"contradiction", probe.contradiction}}},
                                      {"result", pass ? "PASS" : "FAIL"}});
    std::ostringstream csv;
    gexp::io::write_csv(csv, {"control", "max_deviation"},
                        {{"two_point", gexp::io::format_double(converse.max_deviation)},
                         {"f_one_minus_abs", gexp::io::format_double(linear.max_deviation)},
                         {"f_constant", gexp::io::format_double(constant.max_deviation)}});
    write_text(dir / "control.csv", csv.str());
    return print_result("control", pass,
                        std::min({converse.max_deviation, linear.max_deviation, constant.max_deviation}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sublinear expectation and G-normal toolkit"};
    app.require_subcommand(1);
    Flags flags;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"gheat", "Solve the G-heat equation for one test function"},
        {"moments", "Upper/lower means and variances of a law"},
        {"axioms", "Randomized axiom check on scenario sets"},
        {"scan", "Lambda-invariance scan of lambda X + f(lambda) Y"},
        {"thm1", "Verify the unit-variance characterization"},
        {"thm2", "Verify the general (a, b) characterization"},
        {"control", "Run the negative controls"}};

    // Flag name -> config key; each flag is recorded only when given.
    std::vector<std::pair<CLI::Option*, std::string>> overrides;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "TOML or JSON config file");
        overrides.emplace_back(sub->add_option("--out", flags.out, "Output directory"), "out");
        overrides.emplace_back(sub->add_option("--lambda-grid", flags.lambda_grid, "Comma-separated lambdas"),
                               "lambda_grid");
        overrides.emplace_back(sub->add_option("--phi-family", flags.phi_family, "canonical or comma list"),
                               "phi_family");
        overrides.emplace_back(sub->add_option("--phi", flags.phi, "Test function name"), "phi");
        overrides.emplace_back(sub->add_option("--f-override", flags.f_override, "sqrt, 1-abs or const"),
                               "f_override");
        overrides.emplace_back(sub->add_option("--sigma-low", flags.sigma_low), "sigma_low");
        overrides.emplace_back(sub->add_option("--sigma-bar", flags.sigma_bar), "sigma_bar");
        overrides.emplace_back(sub->add_option("--a", flags.a), "a");
        overrides.emplace_back(sub->add_option("--b", flags.b), "b");
        overrides.emplace_back(sub->add_option("--seed", flags.seed), "seed");
        overrides.emplace_back(sub->add_option("--oracle-steps", flags.oracle_steps), "oracle_steps");
        overrides.emplace_back(sub->add_option("--cases", flags.cases, "Axiom cases"), "cases");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        json cfg = flags.config.empty() ? json::object() : gexp::io::load_config(flags.config);
        for (const auto& [opt, key] : overrides) {
            if (opt->count() == 0) continue;
            const auto& raw = opt->results().back();
            if (key == "lambda_grid" || key == "out" || key == "phi_family" || key == "phi" || key == "f_override")
                cfg[key] = raw;
            else if (key == "seed" || key == "oracle_steps" || key == "cases")
                cfg[key] = opt->as<long long>();
            else
                cfg[key] = opt->as<double>();
        }
        const Params params(std::move(cfg));
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "gheat") return cmd_gheat(params);
        if (cmd == "moments") return cmd_moments(params);
        if (cmd == "axioms") return cmd_axioms(params);
        if (cmd == "scan") return cmd_scan(params);
        if (cmd == "thm1") return cmd_thm1(params);
        if (cmd == "thm2") return cmd_thm2(params);
        return cmd_control(params);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
