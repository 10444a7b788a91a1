#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "treebec/config.hpp"
#include "treebec/error.hpp"
#include "treebec/ids.hpp"
#include "treebec/io.hpp"
#include "treebec/krein.hpp"
#include "treebec/pf.hpp"
#include "treebec/spectral.hpp"
#include "treebec/thermo.hpp"

using namespace treebec;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Run {
    RunConfig cfg;
    std::string hash;
    fs::path dir;

    void write_csv(const std::string& name, const io::Csv& csv) const {
        io::write_file(dir / name, csv.text());
        io::log_event(dir, "wrote " + name);
    }
    void write_json(const std::string& name, ordered_json body) const {
        ordered_json j;
        j["treebec"] = io::version();
        j["config"] = hash;
        for (auto& [k, v] : body.items()) j[k] = v;
        io::write_file(dir / name, j.dump(2) + "\n");
        io::log_event(dir, "wrote " + name);
    }
};

std::string tag(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

void warn(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

void cmd_build(const Run& r) {
    for (int n : r.cfg.n_range) {
        const auto m = graph::build_model(r.cfg.model, n);
        if (n == r.cfg.n_range.front()) warn(m.warnings);
        io::write_file(r.dir / ("graph_n" + std::to_string(n) + ".txt"),
                       io::header_line(r.hash) + "\n" + graph::dump(m));
        io::log_event(r.dir, "wrote graph_n" + std::to_string(n) + ".txt");
    }
}

void cmd_spectrum(const Run& r) {
    io::Csv summary({"n", "size", "lambda_max", "residual", "pf_norm2", "spectrum_max"}, r.hash);
    for (int n : r.cfg.n_range) {
        const auto fv = pf::make_finite_volume(r.cfg.model, n, r.cfg.tol.eig);
        if (n == r.cfg.n_range.front()) warn(fv.model.warnings);
        io::Csv vec({"vertex", "pf"}, r.hash);
        for (std::int64_t x = 0; x < fv.model.size(); ++x) vec.row({double(x), fv.pf[x]});
        r.write_csv("pf_n" + std::to_string(n) + ".csv", vec);
        double top = nan();
        if (fv.model.size() <= r.cfg.dense_limit) {
            const auto eig = spectral::full_spectrum(fv.model.adjacency, r.cfg.dense_limit);
            io::Csv ev({"index", "eigenvalue"}, r.hash);
            for (std::size_t k = 0; k < eig.size(); ++k) ev.row({double(k), eig[k]});
            r.write_csv("eigenvalues_n" + std::to_string(n) + ".csv", ev);
            top = eig.back();
        }
        summary.row({double(n), double(fv.model.size()), fv.lambda_max, fv.residual, fv.pf_norm2, top});
    }
    r.write_csv("spectrum.csv", summary);
}

krein::ModelNorm norm_for(const Run& r) {
    warn(graph::build_model(r.cfg.model, 0).warnings);
    return krein::model_norm(r.cfg.model, r.cfg.norm_levels, r.cfg.tol.secular);
}

void cmd_secular(const Run& r) {
    const auto norm = norm_for(r);
    const auto tr = krein::classify_transience(norm, r.cfg.transience_probes, r.cfg.tol.transience_gap);
    io::Csv levels({"n", "lambda"}, r.hash);
    for (std::size_t i = 0; i < norm.levels.size(); ++i) levels.row({double(norm.levels[i]), norm.per_level[i]});
    r.write_csv("secular_levels.csv", levels);
    io::Csv probes({"j", "lambda", "value"}, r.hash);
    for (std::size_t j = 0; j < tr.lambdas.size(); ++j) probes.row({double(j + 1), tr.lambdas[j], tr.values[j]});
    r.write_csv("transience_probes.csv", probes);
    const double em = norm.estimate - krein::branch_point(r.cfg.model.Q);
    ordered_json out{{"model", graph::kind_token(r.cfg.model)},
                     {"Q", r.cfg.model.Q},
                     {"lambdaStar", norm.estimate},
                     {"uncertainty", norm.uncertainty},
                     {"atBranchPoint", norm.at_branch_point},
                     {"Em", em},
                     {"verdict", krein::to_string(tr.verdict)},
                     {"note", tr.note}};
    if (r.cfg.model.kind != graph::Kind::Tree) {
        const auto gap = ids::hidden_gap(r.cfg.model, norm.estimate, r.cfg.n_range);
        io::Csv g({"n", "lambda_max", "e0"}, r.hash);
        for (const auto& row : gap.rows) g.row({double(row.n), row.lambda_max, row.e0});
        r.write_csv("hidden_gap.csv", g);
        out["EmFromBalls"] = gap.em_from_balls;
    }
    r.write_json("secular.json", out);
}

void cmd_ids(const Run& r) {
    const auto norm = norm_for(r);
    const double em = norm.estimate - krein::branch_point(r.cfg.model.Q);
    graph::ModelSpec flat = r.cfg.model;
    flat.kind = graph::Kind::Tree;
    for (int n : r.cfg.n_range) {
        const auto y = graph::build_model(r.cfg.model, n);
        if (y.size() > r.cfg.dense_limit) break;
        const auto x = graph::build_model(flat, n);
        const auto hy = ids::energies(spectral::full_spectrum(y.adjacency, r.cfg.dense_limit), norm.estimate);
        const auto hx = ids::energies(spectral::full_spectrum(x.adjacency, r.cfg.dense_limit), norm.estimate);
        const auto grid = ids::ids_grid(std::min(0.0, hy.front()), hy.back(), r.cfg.grid_points, {&hy, &hx});
        io::Csv csv({"energy", "F_perturbed", "F_tree"}, r.hash);
        for (double g : grid) csv.row({g, ids::cumulative(hy, g), ids::cumulative(hx, g)});
        r.write_csv("ids_n" + std::to_string(n) + ".csv", csv);
    }
    ordered_json phi = ordered_json::array();
    for (double b : r.cfg.beta) {
        const auto p = ids::phi_series(r.cfg.model.Q, b, r.cfg.k_max);
        phi.push_back({{"beta", b}, {"value", p.value}, {"tailBound", p.tail_bound}});
    }
    r.write_json("ids.json", {{"lambdaStar", norm.estimate}, {"Em", em}, {"delta", -em}, {"phiAtBeta", phi}});
}

// Returns true when omega_D was refused.
bool thermo_for_beta(const Run& r, const krein::ModelNorm& norm, const krein::TransienceReport& tr,
                     double beta, ordered_json& manifest) {
    const auto& cfg = r.cfg;
    const int Q = cfg.model.Q;
    const double em = norm.estimate - krein::branch_point(Q);
    std::vector<pf::FiniteVolume> fvs;
    for (int n : cfg.n_range) fvs.push_back(pf::make_finite_volume(cfg.model, n, cfg.tol.eig));
    for (const auto& fv : fvs)
        for (auto p : cfg.probes)
            if (p >= fv.model.size()) throw ConfigError("probe vertex outside the smallest ball");

    std::vector<std::string> cols{"n", "size", "lambda_max", "mu", "rho"};
    for (auto p : cfg.probes) cols.push_back("two_point_" + std::to_string(p));
    for (const char* c : {"term3", "witness", "condensate_density"}) cols.push_back(c);
    io::Csv csv(cols, r.hash);

    thermo::GibbsOptions opt;
    opt.dense_limit = cfg.dense_limit;
    opt.tol = cfg.tol.solve;
    std::vector<thermo::DenseVolume> vols;
    Vec mus_dense;
    thermo::DivergenceProbe div{};
    const double D = cfg.schedule.rule == thermo::Rule::Fregg3 ? cfg.schedule.param : 0.0;
    for (const auto& fv : fvs) {
        const auto size = fv.model.size();
        const bool dense = size <= cfg.dense_limit;
        std::optional<thermo::DenseVolume> vol;
        if (dense) vol = thermo::dense_volume(cfg.model, fv.model.radius(), norm.estimate, cfg.dense_limit);
        const double mu = thermo::realize_mu(cfg.schedule, norm, fv.model, fv.lambda_max, fv.pf_norm2,
                                             beta, vol ? &vol->h : nullptr);
        std::vector<double> row{double(fv.model.radius()), double(size), fv.lambda_max, mu,
                                vol ? thermo::finite_density(vol->h, beta, mu) : nan()};
        const thermo::BoseOperator op(fv, norm.estimate, beta, mu, opt);
        double root_value = 0.0;
        for (std::size_t i = 0; i < cfg.probes.size(); ++i) {
            Vec e(size, 0.0);
            e[cfg.probes[i]] = 1.0;
            const double v = op.apply(e)[cfg.probes[i]];
            if (i == 0) root_value = v;
            row.push_back(v);
        }
        const double e0 = norm.estimate - fv.lambda_max - mu;
        const double witness = 1.0 / (fv.pf_norm2 * e0);
        row.push_back(1.0 / (double(size) * e0));
        row.push_back(witness);
        row.push_back(D > 0 ? thermo::condensate_density(fv.model, norm.estimate, D) : nan());
        csv.row(row);
        if (!cfg.probes.empty()) div.rows.push_back({fv.model.radius(), mu, root_value, witness});
        if (vol) {
            vols.push_back(std::move(*vol));
            mus_dense.push_back(mu);
        }
    }
    r.write_csv("thermo_beta" + tag(beta) + ".csv", csv);

    ordered_json j{{"beta", beta}, {"lambdaStar", norm.estimate}, {"Em", em},
                   {"transience", krein::to_string(tr.verdict)}};
    if (div.rows.size() >= 2) {
        div.growth = div.rows.back().value / div.rows.front().value;
        div.diverging = div.growth >= cfg.divergence_factor &&
                        div.rows.back().value > div.rows[div.rows.size() - 2].value;
        j["divergence"] = {{"probe", cfg.probes.front()},
                           {"growth", div.growth},
                           {"verdict", div.diverging ? "Diverging" : "Bounded"}};
    }
    const auto series = thermo::critical_density_series(Q, em, beta, 1e-13, cfg.k_max);
    ordered_json rc{{"series", series.value}, {"seriesError", series.error}, {"divergent", series.divergent}};
    const Vec fractions{0.4, 0.2, 0.1};
    if (em > 0 && !vols.empty()) {
        const auto mol = thermo::critical_density_mollified(vols, Q, em, beta, Vec(vols.size(), 0.0), fractions);
        rc["mollified"] = mol.value;
        rc["mollifiedNResidual"] = mol.n_residual;
        rc["mollifiedEpsResidual"] = mol.eps_residual;
        const auto n0 = thermo::condensate_fraction(vols, Q, em, beta, mus_dense, fractions);
        j["n0"] = {{"value", n0.value}, {"nResidual", n0.n_residual}, {"epsResidual", n0.eps_residual}};
    }
    j["mollifier"] = {{"family", "trapezoid 0 on [0,eps/2], 1 on [eps,inf)"}, {"epsOverEm", fractions}};
    j["rhoC"] = rc;
    if (cfg.schedule.rule == thermo::Rule::Fregg1) j["limitDensityLabel"] = "conditional";
    bool refused = false;
    if (cfg.schedule.rule == thermo::Rule::Fregg3) {
        try {
            const auto w = thermo::omega_D(norm, tr, D, 0, 0);
            j["omegaD"] = {{"x", 0}, {"y", 0}, {"value", w.value}, {"bounded", w.bounded_part},
                           {"resolvent", w.resolvent_part}, {"condensate", w.condensate_part}};
        } catch (const RefusalError& e) {
            j["omegaD"] = {{"refused", e.what()}};
            refused = true;
        }
    }
    manifest.push_back(j);
    return refused;
}

int cmd_thermo(const Run& r) {
    const auto norm = norm_for(r);
    const auto tr = krein::classify_transience(norm, r.cfg.transience_probes, r.cfg.tol.transience_gap);
    ordered_json runs = ordered_json::array();
    bool refused = false;
    for (double b : r.cfg.beta) refused = thermo_for_beta(r, norm, tr, b, runs) || refused;
    r.write_json("thermo.json", {{"model", graph::kind_token(r.cfg.model)},
                                 {"Q", r.cfg.model.Q},
                                 {"mode", graph::mode_token(r.cfg.model.mode)},
                                 {"schedule", thermo::rule_token(r.cfg.schedule)},
                                 {"runs", runs}});
    if (refused) {
        std::cerr << "omega_D refused: the model is " << krein::to_string(tr.verdict) << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bose condensation on perturbed Cayley trees"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", io::version());

    std::string config_file, kind, mode, n_range, schedule, output;
    std::optional<int> Q, q, probes_j, grid_points, k_max;
    std::vector<double> beta;
    std::vector<int> levels, probes;
    std::optional<double> tol_eig, tol_solve, tol_secular, gap, factor;
    std::optional<std::int64_t> dense_limit;
    app.add_option("--config", config_file, "JSON file with the RunConfig schema")->check(CLI::ExistingFile);
    app.add_option("--kind", kind, "Tree, HQ or GQq");
    app.add_option("--Q", Q, "tree degree");
    app.add_option("--q", q, "degree of the base subtree for GQq");
    app.add_option("--mode", mode, "DiagonalUnit or EdgeDouble");
    app.add_option("--n-range", n_range, "radii, as 4..12 or 6,8,10");
    app.add_option("--beta", beta, "inverse temperatures");
    app.add_option("--schedule", schedule, "fixed:MU, density:RHO, fregg1:C or fregg3:D");
    app.add_option("--tol-eig", tol_eig);
    app.add_option("--tol-solve", tol_solve);
    app.add_option("--tol-secular", tol_secular);
    app.add_option("--transience-gap", gap);
    app.add_option("--transience-probes", probes_j);
    app.add_option("--norm-levels", levels);
    app.add_option("--output", output, "output directory");
    app.add_option("--dense-limit", dense_limit);
    app.add_option("--probes", probes, "probe vertices (BFS labels)");
    app.add_option("--grid-points", grid_points);
    app.add_option("--k-max", k_max);
    app.add_option("--divergence-factor", factor);

    for (const char* name : {"build", "spectrum", "secular", "ids", "thermo", "report"}) app.add_subcommand(name);
    app.get_subcommand("build")->description("write the perturbed balls");
    app.get_subcommand("spectrum")->description("top eigenpairs and small-volume spectra");
    app.get_subcommand("secular")->description("norm of the perturbed tree and transience verdict");
    app.get_subcommand("ids")->description("integrated density of states");
    app.get_subcommand("thermo")->description("densities, schedules and two-point functions");
    app.get_subcommand("report")->description("run every stage");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    Run run;
    try {
        nlohmann::json j = nlohmann::json::object();
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            std::stringstream ss;
            ss << in.rdbuf();
            j = nlohmann::json::parse(ss.str(), nullptr, false);
            if (j.is_discarded()) throw ConfigError("config file is not valid JSON");
        }
        if (!kind.empty()) j["model"]["kind"] = kind;
        if (Q) j["model"]["Q"] = *Q;
        if (q) j["model"]["q"] = *q;
        if (!mode.empty()) j["mode"] = mode;
        if (!n_range.empty()) j["nRange"] = n_range;
        if (!beta.empty()) j["beta"] = beta;
        if (!schedule.empty()) j["schedule"] = schedule;
        if (tol_eig) j["tolerances"]["eig"] = *tol_eig;
        if (tol_solve) j["tolerances"]["solve"] = *tol_solve;
        if (tol_secular) j["tolerances"]["secular"] = *tol_secular;
        if (gap) j["tolerances"]["transienceGap"] = *gap;
        if (probes_j) j["transienceProbes"] = *probes_j;
        if (!levels.empty()) j["normLevels"] = levels;
        if (!output.empty()) j["output"] = output;
        if (dense_limit) j["denseLimit"] = *dense_limit;
        if (!probes.empty()) j["probes"] = probes;
        if (grid_points) j["gridPoints"] = *grid_points;
        if (k_max) j["kMax"] = *k_max;
        if (factor) j["divergenceFactor"] = *factor;
        run.cfg = parse_config(j.dump());
        run.hash = config_hash(run.cfg);
        run.dir = run.cfg.output_dir;
        run.write_json("config.json", {{"run", ordered_json::parse(canonical_json(run.cfg))}});
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        io::log_event(run.dir, "start " + name + " config " + run.hash);
        int code = 0;
        if (name == "build") cmd_build(run);
        else if (name == "spectrum") cmd_spectrum(run);
        else if (name == "secular") cmd_secular(run);
        else if (name == "ids") cmd_ids(run);
        else if (name == "thermo") code = cmd_thermo(run);
        else {
            cmd_build(run);
            cmd_spectrum(run);
            cmd_secular(run);
            cmd_ids(run);
            code = cmd_thermo(run);
        }
        io::log_event(run.dir, "done " + name + " exit " + std::to_string(code));
        return code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const CapacityError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const RefusalError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}
