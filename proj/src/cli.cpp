#include "vesselkit/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "vesselkit/config.hpp"
#include "vesselkit/errors.hpp"
#include "vesselkit/verify.hpp"

namespace vesselkit::cli {

namespace {

constexpr const char* kGridHelp = "grid as x0:x1:nx,t0:t1:nt";
constexpr const char* kDefaultGrid = "-5:5:101,0:1:21";

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// One signed real or imaginary term starting at pos.
bool parse_term(const std::string& s, std::size_t& pos, cplx& acc, bool& imaginary)
{
    imaginary = false;
    double sign = 1.0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        if (s[pos] == '-') sign = -1.0;
        ++pos;
    }
    if (pos >= s.size()) return false;

    double value = 1.0;
    bool have_value = false;
    auto read_number = [&](double& out) {
        const char* begin = s.c_str() + pos;
        char* end = nullptr;
        if (*begin == '+' || *begin == '-' || std::isspace(static_cast<unsigned char>(*begin))) return false;
        out = std::strtod(begin, &end);
        if (end == begin) return false;
        pos += static_cast<std::size_t>(end - begin);
        return true;
    };

    static const std::string root = "√";
    if (s.compare(pos, root.size(), root) == 0 || s.compare(pos, 5, "sqrt(") == 0) {
        const bool paren = s[pos] == 's';
        pos += paren ? 5 : root.size();
        double radicand = 0.0;
        if (!read_number(radicand) || radicand < 0) return false;
        if (paren) {
            if (pos >= s.size() || s[pos] != ')') return false;
            ++pos;
        }
        value = std::sqrt(radicand);
        have_value = true;
    } else if (s[pos] != 'i') {
        if (!read_number(value)) return false;
        have_value = true;
    }

    if (pos < s.size() && s[pos] == 'i') {
        ++pos;
        acc += cplx(0.0, sign * value);
        imaginary = true;
        return true;
    }
    if (!have_value) return false;
    acc += sign * value;
    return true;
}

struct SolitonFlags {
    std::string k;
    std::string b;
    int n = 1;
};

SolitonSpec soliton_from_flags(const SolitonFlags& f)
{
    SolitonSpec spec;
    spec.n = f.n;
    if (f.n < 1) throw ValidationError("--n must be at least 1");
    std::vector<std::string> ks;
    std::vector<std::string> bs;
    try {
        ks = split_list(f.k);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("--k: ") + e.what());
    }
    if (ks.empty()) throw ValidationError("--k: mode list is empty");
    try {
        bs = split_list(f.b);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("--b: ") + e.what());
    }
    if (bs.size() != ks.size()) throw ValidationError("--b must list one value per --k entry");
    for (std::size_t j = 0; j < ks.size(); ++j) {
        SolitonMode m;
        std::size_t used = 0;
        try {
            m.k = std::stod(ks[j], &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != ks[j].size()) throw ValidationError("--k: '" + ks[j] + "' is not a number");
        try {
            m.b = parse_complex(bs[j]);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("--b: ") + e.what());
        }
        spec.modes.push_back(m);
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw ValidationError(std::string("--k/--b: ") + e.what());
    }
    return spec;
}

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);
    return buf;
}

struct FieldRow {
    double x;
    double t;
    cplx q;
    cplx beta;
    cplx tau;
};

FieldRow fields_at(const VesselState& s)
{
    const ScalarFields sf = scalar_fields(s);
    const BetaJet jet = beta_jet(s, 1);
    return {s.x, s.t, 2.0 * jet.at(1), sf.beta, sf.tau};
}

void write_header(std::ostream& os, const std::vector<std::string>& fields)
{
    os << "x,t";
    for (const auto& f : fields) os << ",re_" << f << ",im_" << f;
    os << "\n";
}

void write_row(std::ostream& os, const FieldRow& r, const std::vector<std::string>& fields)
{
    os << fmt17(r.x) << ',' << fmt17(r.t);
    for (const auto& f : fields) {
        const cplx v = f == "q" ? r.q : f == "beta" ? r.beta : r.tau;
        os << ',' << fmt17(v.real()) << ',' << fmt17(v.imag());
    }
    os << "\n";
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw ValidationError("cannot open output file '" + path + "'");
        os_ = file_.get();
    }
    std::ostream& stream() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

const std::vector<std::string> kAllFields{"q", "beta", "tau"};

int cmd_soliton(const SolitonFlags& flags, const std::string& grid_text, const std::string& out_path,
                std::ostream& out, std::ostream& err)
{
    const SolitonSpec spec = soliton_from_flags(flags);
    const GridSpec grid = GridSpec::parse(grid_text);
    const auto pts = grid_points(grid);
    std::vector<FieldRow> rows(pts.size());
    try {
        parallel_for(static_cast<int>(pts.size()),
                     [&](int i) { rows[i] = fields_at(soliton_vessel(spec, pts[i].x, pts[i].t)); });
    } catch (const SingularMatrixError& e) {
        err << "error: tau vanishes inside the grid: " << e.what() << "\n";
        return exit_singular;
    }
    Output o(out_path, out);
    write_header(o.stream(), kAllFields);
    for (const auto& r : rows) write_row(o.stream(), r, kAllFields);
    return exit_ok;
}

void emit_levels(std::ostream& os, int levels, RenderFormat format, RecursionRule rule, bool companions)
{
    const auto table = hierarchy_table(levels, rule);
    if (format == RenderFormat::json) {
        nlohmann::json doc;
        doc["recursion"] = to_string(rule);
        doc["levels"] = nlohmann::json::array();
        for (const auto& e : table) {
            nlohmann::json lvl{{"level", e.level}, {"b", to_json(e.b)}};
            if (companions) {
                lvl["a"] = to_json(e.a);
                lvl["c"] = to_json(e.c);
            }
            doc["levels"].push_back(std::move(lvl));
        }
        os << doc.dump(2) << "\n";
        return;
    }
    const bool latex = format == RenderFormat::latex;
    auto line = [&](const char* name, int m, const DiffPoly& p) {
        if (latex)
            os << name << "_{" << m << "} &= " << render(p, format) << " \\\\\n";
        else
            os << name << "_" << m << " = " << render(p, format) << "\n";
    };
    for (const auto& e : table) {
        if (!companions && !latex) {
            os << render(e.b, format) << "\n";
            continue;
        }
        line("b", e.level, e.b);
        if (companions) {
            line("a", e.level, e.a);
            line("c", e.level, e.c);
        }
    }
}

int cmd_hierarchy(int levels, const std::string& format, const std::string& recursion, bool companions,
                  std::ostream& out)
{
    RenderFormat f;
    if (format == "text")
        f = RenderFormat::text;
    else if (format == "json")
        f = RenderFormat::json;
    else if (format == "latex")
        f = RenderFormat::latex;
    else
        throw ValidationError("--format must be text, json or latex");
    if (levels < 0) throw ValidationError("--levels must be non-negative");
    if (levels > kMaxHierarchyLevel)
        throw ValidationError("--levels " + std::to_string(levels) + " exceeds the maximum of " +
                              std::to_string(kMaxHierarchyLevel));
    std::ostringstream buf;
    emit_levels(buf, levels, f, recursion_rule_from_string(recursion), companions);
    out << buf.str();
    return exit_ok;
}

struct VerifyFlags {
    std::string suite = "all";
    std::string config;
    SolitonFlags soliton;
    std::optional<double> tol;
    std::string grid;
    bool json = false;
};

int cmd_verify(const VerifyFlags& f, std::ostream& out, std::ostream& err)
{
    static const std::vector<std::string> suites{"vessel", "evolution", "kdv", "hierarchy", "all"};
    if (std::find(suites.begin(), suites.end(), f.suite) == suites.end())
        throw ValidationError("--suite must be one of vessel, evolution, kdv, hierarchy, all");

    std::shared_ptr<const VesselSource> source;
    GridSpec grid;
    if (!f.config.empty()) {
        if (!f.soliton.k.empty() || !f.soliton.b.empty())
            throw ValidationError("--config cannot be combined with --k/--b");
        const RunConfig cfg = RunConfig::load(f.config);
        source = cfg.make_source();
        grid = cfg.grid;
    } else {
        if (f.soliton.k.empty()) throw ValidationError("verify needs --config or --k/--b");
        source = std::make_shared<SolitonSource>(soliton_from_flags(f.soliton));
    }
    if (!f.grid.empty()) grid = GridSpec::parse(f.grid);
    if (f.tol && !(*f.tol > 0)) throw ValidationError("--tol must be positive");

    const auto type = source->evolution().hierarchy_type();
    const bool all = f.suite == "all";
    auto need_hierarchy = [&](const char* suite) {
        if (!type) throw ValidationError(std::string("suite '") + suite + "' needs a hierarchy evolution");
    };

    ResidualReport report;
    if (all || f.suite == "vessel") report.append(suite_vessel_invariants(*source, grid));
    if (f.suite == "evolution" || (all && type)) {
        need_hierarchy("evolution");
        const auto lambdas = sample_lambdas(source->state_at(0.0, grid.t0).A, 5, InvariantOptions{}.seed);
        report.append(suite_evolution_identities(*source, grid, lambdas));
    }
    if (f.suite == "kdv" || (all && type == 1)) {
        need_hierarchy("kdv");
        if (*type != 1) throw ValidationError("suite 'kdv' needs a type-1 evolution");
        report.append(residual_kdv(*source, grid));
    }
    const FlowConvention conv = shipped_flow_convention();
    if (f.suite == "hierarchy" || (all && type && conv.phase(*type - conv.type_offset))) {
        need_hierarchy("hierarchy");
        if (!conv.phase(*type - conv.type_offset))
            throw ValidationError("no pinned flow phase for vessel type " + std::to_string(*type));
        report.append(residual_hierarchy_flow(*source, conv, grid));
    }
    if (f.tol) report.override_tolerance(*f.tol);

    if (f.json)
        out << report.to_json().dump(2) << "\n";
    else
        out << report.to_text();
    if (!report.all_pass()) {
        err << "verification failed for " << source->describe() << "\n";
        return exit_verify_failed;
    }
    return exit_ok;
}

constexpr double kTauFloor = 1e-10;

bool real_valued(cplx z) { return std::abs(z.imag()) <= 1e-12 * std::abs(z); }

int cmd_evolve(const std::string& config_path, const std::string& out_override, std::ostream& out,
               std::ostream& err)
{
    const RunConfig cfg = RunConfig::load(config_path);
    const auto source = cfg.make_source();
    const GridSpec& grid = cfg.grid;

    Output o(out_override.empty() ? cfg.outputs.path : out_override, out);
    write_header(o.stream(), cfg.outputs.fields);
    std::optional<double> last_good;
    std::vector<cplx> tau_start(grid.nx);
    std::vector<cplx> tau_prev(grid.nx);
    for (int j = 0; j < grid.nt; ++j) {
        const double t = grid.t_at(j);
        std::vector<FieldRow> rows(grid.nx);
        std::vector<double> lyap(grid.nx);
        try {
            parallel_for(grid.nx, [&](int i) {
                const VesselState s = source->state_at(grid.x_at(i), t);
                rows[i] = fields_at(s);
                lyap[i] = lyapunov_residual(s);
            });
            for (int i = 0; i < grid.nx; ++i) {
                const cplx tau = rows[i].tau;
                if (j == 0) tau_start[i] = tau;
                if (std::abs(tau) < kTauFloor * std::abs(tau_start[i]))
                    throw PoleError("tau vanishes at x=" + fmt17(grid.x_at(i)));
                if (j > 0 && real_valued(tau) && real_valued(tau_prev[i]) && tau.real() * tau_prev[i].real() < 0)
                    throw PoleError("tau changes sign at x=" + fmt17(grid.x_at(i)) + " after t=" +
                                    fmt17(grid.t_at(j - 1)));
                tau_prev[i] = tau;
            }
        } catch (const Error& e) {
            err << "error: guard tripped at t=" << fmt17(t) << ": " << e.what() << "\n";
            if (last_good)
                err << "last good time t=" << fmt17(*last_good) << "\n";
            else
                err << "no output time completed\n";
            o.stream().flush();
            return exit_runtime_guard;
        }
        for (const auto& r : rows) write_row(o.stream(), r, cfg.outputs.fields);
        err << "t=" << fmt17(t) << " lyapunov_residual=" << fmt17(*std::max_element(lyap.begin(), lyap.end()))
            << "\n";
        last_good = t;
    }
    return exit_ok;
}

template <typename F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const InvalidCoefficientsError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    } catch (const SingularMatrixError& e) {
        err << "error: " << e.what() << "\n";
        return exit_singular;
    } catch (const PoleError& e) {
        err << "error: " << e.what() << "\n";
        return exit_singular;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_runtime_guard;
    }
}

} // namespace

cplx parse_complex(const std::string& text)
{
    std::string s;
    for (char c : text)
        if (c != ' ' && c != '\t') s += c;
    if (s.empty()) throw ValidationError("empty complex literal");
    cplx acc = 0.0;
    std::size_t pos = 0;
    int terms = 0;
    bool imaginary = false;
    while (pos < s.size()) {
        const bool first_imaginary = imaginary;
        if (terms == 2 || (terms == 1 && (first_imaginary || (s[pos] != '+' && s[pos] != '-'))) ||
            !parse_term(s, pos, acc, imaginary) || (terms == 1 && !imaginary))
            throw ValidationError("cannot parse complex literal '" + text + "'");
        ++terms;
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw ValidationError("complex literal '" + text + "' is not finite");
    return acc;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    if (trim(text).empty()) return items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ValidationError("empty item in list '" + text + "'");
        items.push_back(item);
    }
    if (text.back() == ',') throw ValidationError("empty item in list '" + text + "'");
    return items;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"vesselkit: KdV vessels, solitons and hierarchy flows", "vesselkit"};
    app.require_subcommand(1);

    SolitonFlags sol;
    std::string sol_grid = kDefaultGrid;
    std::string sol_out;
    auto* soliton = app.add_subcommand("soliton", "write q, beta and tau of a soliton vessel as CSV");
    soliton->add_option("--k", sol.k, "comma-separated positive wave numbers")->required();
    soliton->add_option("--b", sol.b, "comma-separated complex amplitudes (a+bi, sqrt(x) or √x)")->required();
    soliton->add_option("--n", sol.n, "evolutionary type (1 = KdV)")->capture_default_str();
    soliton->add_option("--grid", sol_grid, kGridHelp)->capture_default_str();
    soliton->add_option("--out", sol_out, "output CSV path (default: standard output)");

    int levels = 0;
    std::string format = "text";
    std::string recursion = "closed";
    bool companions = false;
    auto* hierarchy = app.add_subcommand("hierarchy", "emit the hierarchy right-hand sides b_0..b_L");
    hierarchy->add_option("--levels", levels, "highest level L (at most 10)")->capture_default_str();
    hierarchy->add_option("--format", format, "text, json or latex")->capture_default_str();
    hierarchy->add_option("--recursion", recursion, "closed or printed")->capture_default_str();
    hierarchy->add_flag("--companions", companions, "also emit a_m and c_m");

    VerifyFlags vf;
    double tol = 0.0;
    auto* verify = app.add_subcommand("verify", "run residual suites; exit 1 if any row fails");
    verify->add_option("--suite", vf.suite, "vessel, evolution, kdv, hierarchy or all")->capture_default_str();
    verify->add_option("--config", vf.config, "run configuration (JSON)");
    verify->add_option("--k", vf.soliton.k, "comma-separated wave numbers of a soliton source");
    verify->add_option("--b", vf.soliton.b, "comma-separated complex amplitudes");
    verify->add_option("--n", vf.soliton.n, "evolutionary type of the soliton source")->capture_default_str();
    auto* tol_opt = verify->add_option("--tol", tol, "replace every row tolerance");
    verify->add_option("--grid", vf.grid, kGridHelp);
    verify->add_flag("--json", vf.json, "print the report as JSON");

    std::string evolve_config;
    std::string evolve_out;
    auto* evolve = app.add_subcommand("evolve", "step a configured vessel in t and write its fields");
    evolve->add_option("--config", evolve_config, "run configuration (JSON)")->required();
    evolve->add_option("--out", evolve_out, "output CSV path (overrides outputs.path)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_validation;
    }

    if (soliton->parsed()) return guarded(err, [&] { return cmd_soliton(sol, sol_grid, sol_out, out, err); });
    if (hierarchy->parsed())
        return guarded(err, [&] { return cmd_hierarchy(levels, format, recursion, companions, out); });
    if (verify->parsed()) {
        if (tol_opt->count()) vf.tol = tol;
        return guarded(err, [&] { return cmd_verify(vf, out, err); });
    }
    return guarded(err, [&] { return cmd_evolve(evolve_config, evolve_out, out, err); });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, out, err);
}

} // namespace vesselkit::cli
