// ddmcert: Schwarz iteration with guaranteed majorants, table drivers and a
// self-check.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ddmcert/ddmcert.hpp"

namespace fs = std::filesystem;
using namespace ddmcert;

namespace {

enum Exit { ok = 0, config_error = 1, solver_failure = 2, guarantee_violation = 3 };

struct Flags {
    std::string config;
    ConfigValues values;
    bool emit_fields = false;
};

void add_common(CLI::App* sub, Flags& f) {
    auto opt = [&](const char* name, std::optional<std::string>& slot, const char* help) {
        sub->add_option_function<std::string>(name, [&slot](const std::string& v) { slot = v; }, help);
    };
    sub->set_help_flag("--help", "print this help message and exit");
    sub->add_option("--config", f.config, "key=value config file");
    opt("--preset", f.values.preset, "lshape or rect");
    opt("--h", f.values.h, "fine grid spacing (1/h integer)");
    opt("--H", f.values.coarse_h, "corrector grid spacing (defaults to h)");
    opt("--sweeps", f.values.sweeps, "Schwarz sweeps");
    opt("--mode", f.values.mode, "multiplicative or additive");
    opt("--eps", f.values.eps, "fixed or opt");
    opt("--out", f.values.out, "output directory");
    opt("--m", f.values.m, "rect preset: cells in x");
    opt("--n", f.values.n, "rect preset: cells in y");
    sub->add_flag("--emit-fields", f.emit_fields, "write VTK fields per evaluated iterate");
}

ConfigValues merged(const Flags& f, const ConfigValues& defaults = {}) {
    ConfigValues v = defaults;
    if (!f.config.empty()) v.merge_from(parse_config_file(f.config));
    v.merge_from(f.values);
    if (f.emit_fields) v.emit_fields = "true";
    return v;
}

RunConfig load(const Flags& f, const ConfigValues& defaults = {}) { return resolve_config(merged(f, defaults)); }

std::string out_dir(const RunConfig& c) {
    fs::create_directories(c.out);
    return c.out;
}

void write_outputs(const RunConfig& c, const std::vector<HistoryRow>& rows, TableLayout layout,
                   const std::string& caption) {
    const std::string dir = out_dir(c);
    std::ofstream csv(dir + "/history.csv", std::ios::binary);
    write_history_csv(csv, rows);
    std::ofstream md(dir + "/table.md");
    write_table_md(md, rows, layout, caption);
    write_table_md(std::cout, rows, layout, caption);
}

int guarantee_exit(const std::vector<HistoryRow>& rows) {
    for (const auto& r : rows)
        if (!guarantee_holds(r.report)) {
            std::cerr << "guarantee violated at sweep " << r.sweep << " step " << r.step << ": error "
                      << *r.report.energy_error << " > majorant " << r.report.total << "\n";
            return guarantee_violation;
        }
    return ok;
}

int cmd_run(const RunConfig& c) {
    Experiment ex = c.preset == Preset::lshape ? Experiment::lshape(c.h) : Experiment::rect(c.m, c.n, c.h);
    SchwarzSolver solver = ex.schwarz({c.mode, c.sweeps});
    std::vector<HistoryRow> rows;
    const std::string dir = out_dir(c);
    for (int n = 1; n <= c.sweeps; ++n) {
        solver.sweep();
        const ScalarFieldP1& v = solver.state().iterate;
        Certificate cert = ex.certify(v, c.coarse_h, c.eps);
        rows.push_back({c.h, c.coarse_h, n, solver.state().steps.back().step, cert.report});
        if (c.emit_fields) write_fields_vtk(dir + "/fields_sweep" + std::to_string(n) + ".vtk", ex, v, cert.flux);
    }
    write_outputs(c, rows, TableLayout::by_sweep, "Majorant per sweep");
    return guarantee_exit(rows);
}

int cmd_table(int which, const RunConfig& c, bool h_given, bool sweeps_given) {
    const TableOptions opt{c.eps, c.mode};
    std::vector<HistoryRow> rows;
    switch (which) {
        case 1:
            rows = table_by_h(h_given ? std::vector<double>{c.h} : table1_hs(), sweeps_given ? c.sweeps : 16, opt);
            write_outputs(c, rows, TableLayout::by_h, "Corrector on the fine mesh (H = h)");
            break;
        case 2: {
            std::vector<double> hs;
            const double h = h_given ? c.h : 1.0 / 64;
            for (double H : table2_coarse_hs())
                if (H >= h) hs.push_back(H);
            rows = table_by_coarse_h(h, hs, sweeps_given ? c.sweeps : 16, opt);
            write_outputs(c, rows, TableLayout::by_coarse_h, "Corrector on a coarse mesh (H > h)");
            break;
        }
        case 3:
            rows = table_by_step(h_given ? c.h : 1.0 / 64, table3_steps(), opt);
            write_outputs(c, rows, TableLayout::by_step, "Increasing number of subdomain solves (H = h)");
            break;
        default:
            rows = table_by_step(h_given ? c.h : 1.0 / 64, table4_steps(), opt);
            write_outputs(c, rows, TableLayout::per_subdomain, "Volume terms per basic subdomain (H = h)");
            break;
    }
    return guarantee_exit(rows);
}

int cmd_check(const RunConfig& c) {
    int failures = 0;
    bool violated = false;
    auto report = [&](bool pass, const std::string& name) {
        std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
        failures += !pass;
    };
    Experiment ex = Experiment::lshape(c.h);
    const SchwarzState s = ex.schwarz({c.mode, c.sweeps}).run();
    const LinearSystem sys = assemble_system(ex.mesh(), ex.problem());
    const ScalarFieldP1 vh = solve_global(ex.mesh(), ex.problem());
    const auto errs = discrete_sweep_errors(s, sys.matrix, vh.values);
    bool mono = true;
    for (std::size_t i = 1; i < errs.size(); ++i) mono = mono && errs[i] <= errs[i - 1] * (1.0 + 1e-9) + 1e-13;
    report(mono, "schwarz discrete error non-increasing");
    if (errs.size() >= 3) report(contraction_estimate(errs).rho < 1.0, "schwarz contraction below 1");
    for (int n = 1; n <= c.sweeps; ++n) {
        const Certificate cert = ex.certify(s.at_sweep(n), c.coarse_h, c.eps);
        const MajorantReport& r = cert.report;
        const bool g = guarantee_holds(r);
        violated = violated || !g;
        double s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (double x : r.m1_sq) s1 += x;
        for (double x : r.m2_sq) s2 += x;
        for (double x : r.m3_sq) s3 += x;
        const std::string tag = " (sweep " + std::to_string(n) + ")";
        report(g, "guarantee" + tag);
        report(cert.residuals.normalized() <= 1e-10, "admissibility" + tag);
        report(s1 == r.M1_sq && s2 == r.M2_sq && s3 == r.M3_sq, "breakdown sums" + tag);
        report(std::abs(r.total_sq - (r.M1_sq + r.M2_sq + r.M3_sq)) <= 1e-12 * r.total_sq, "parts sum" + tag);
    }
    if (violated) return guarantee_violation;
    return failures ? solver_failure : ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Overlapping Schwarz iteration with guaranteed error majorants"};
    app.require_subcommand(1);
    Flags f;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    for (const char* name : {"run", "table1", "table2", "table3", "table4", "check"}) {
        CLI::App* sub = app.add_subcommand(name);
        add_common(sub, f);
        subs.emplace_back(name, sub);
    }
    subs[0].second->description("run the Schwarz iteration and certify every sweep");
    subs[1].second->description("majorant parts for h = 1/4 .. 1/64 with H = h");
    subs[2].second->description("majorant parts for coarse H at h = 1/64");
    subs[3].second->description("majorant parts after 2, 4, 6, 8 subdomain solves");
    subs[4].second->description("per-subdomain volume terms after selected subdomain solves");
    subs[5].second->description("run the invariant suite on a small preset");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }
    try {
        std::string name;
        for (auto& [n, sub] : subs)
            if (sub->parsed()) name = n;
        if (name == "run") return cmd_run(load(f));
        if (name == "check") {
            ConfigValues d;
            d.sweeps = "4";
            return cmd_check(load(f, d));
        }
        const ConfigValues v = merged(f);
        return cmd_table(name.back() - '0', resolve_config(v), v.h.has_value(), v.sweeps.has_value());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << " (residual " << e.residual() << ")\n";
        return solver_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return solver_failure;
    }
}
