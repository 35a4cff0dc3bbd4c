// Batch front end: wires JSON/flag configs to the spectral, simulation and
// characterization modules and emits CSV/JSON artifacts. Every output file
// embeds (version, config hash, seed); rerunning a command with the same
// triple reproduces the file byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "lil/characterize.hpp"
#include "lil/harness.hpp"
#include "lil/io.hpp"
#include "lil/simulate.hpp"
#include "lil/spectral.hpp"
#include "lil/version.hpp"

namespace fs = std::filesystem;
using lil::json;

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitBudget = 3;

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    in >> j;
    return j;
}

std::vector<double> parse_coords(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct Common {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 1;
    int threads = 1;
    json cfg = json::object();

    void load() {
        if (!config_path.empty()) cfg = load_json_file(config_path);
    }
    fs::path out(const std::string& name) const {
        fs::create_directories(out_dir);
        return fs::path(out_dir) / name;
    }
    template <typename T>
    T get(const char* key, T fallback) const {
        if (cfg.contains(key)) return cfg.at(key).get<T>();
        return fallback;
    }
};

lil::ManifoldSpec resolve_manifold(const Common& c, const std::string& manifold_file) {
    if (!manifold_file.empty()) return lil::manifold_from_json(load_json_file(manifold_file));
    if (c.cfg.contains("manifold")) return lil::manifold_from_json(c.cfg.at("manifold"));
    return lil::ManifoldSpec::circle(2.0 * std::numbers::pi);
}

lil::SpectralFunction named_observable(const lil::ManifoldSpec& m, const std::string& name) {
    json j = name;
    json cfg = {{"manifold", lil::to_json(m)},
                {"start", json::array()},
                {"t_max", 3.0},
                {"observables", json::array({j})}};
    // reuse the sim-config observable parser ("phi<k>" / "f<k>" / inline object)
    cfg["start"] = m.kind() == lil::ManifoldKind::Sphere2
                       ? json::array({0.0, 0.0, 1.0})
                       : json(std::vector<double>(m.lengths().size(), 0.0));
    return lil::sim_config_from_json(cfg).observables.at(0);
}

lil::SimConfig base_sim_config(const lil::ManifoldSpec& m, double T, double h, uint64_t seed,
                               std::vector<lil::SpectralFunction> observables) {
    lil::SimConfig cfg;
    cfg.manifold = m;
    cfg.start = m.kind() == lil::ManifoldKind::Sphere2
                    ? m.make_point({0.0, 0.0, 1.0})
                    : m.make_point(std::vector<double>(m.lengths().size(), 0.0));
    cfg.step_h = h;
    cfg.t_max = T;
    cfg.seed = seed;
    cfg.observables = std::move(observables);
    return cfg;
}

int cmd_spectra(const Common& c, const std::string& manifold_file, int N) {
    auto m = resolve_manifold(c, manifold_file);
    json eff = {{"cmd", "spectra"}, {"manifold", lil::to_json(m)}, {"N", N}, {"seed", c.seed}};
    auto pairs = lil::eigenpairs(m, lil::SpectralTruncation(N));
    lil::write_atomic(c.out("spectra.csv"), lil::eigenpair_csv(pairs, lil::config_hash(eff), c.seed));
    std::cout << "wrote spectra.csv (" << pairs.size() << " rows)\n";
    return 0;
}

int cmd_heat_kernel(const Common& c, const std::string& manifold_file, int N, double t,
                    const std::string& xs, const std::string& ys) {
    auto m = resolve_manifold(c, manifold_file);
    auto x = m.make_point(parse_coords(xs));
    auto y = m.make_point(parse_coords(ys));
    if (N == 0) N = lil::default_truncation(m).n_modes;
    json eff = {{"cmd", "heat-kernel"}, {"manifold", lil::to_json(m)}, {"N", N},
                {"t", t},           {"x", x.coords},                  {"y", y.coords},
                {"seed", c.seed}};
    auto r = lil::heat_kernel(m, t, x, y, lil::SpectralTruncation(N));
    json out = {{"meta", lil::meta_json(lil::config_hash(eff), c.seed)},
                {"t", t},
                {"value", r.value},
                {"tail_bound", r.tail_bound}};
    lil::write_atomic(c.out("heat_kernel.json"), out.dump(2) + "\n");
    std::cout << "p_N(" << t << ") = " << r.value << "  (tail bound " << r.tail_bound << ")\n";
    return 0;
}

int cmd_green_kernel(const Common& c, const std::string& manifold_file, int N, double alpha,
                     const std::string& xs, const std::string& ys, const std::string& route,
                     int pairs, double tol) {
    auto m = resolve_manifold(c, manifold_file);
    if (N == 0) N = lil::default_truncation(m).n_modes;
    lil::SpectralTruncation trunc(N);
    json eff = {{"cmd", "green-kernel"}, {"manifold", lil::to_json(m)}, {"N", N},
                {"alpha", alpha},        {"route", route},             {"pairs", pairs},
                {"seed", c.seed}};

    std::vector<std::pair<lil::Point, lil::Point>> pts;
    if (!xs.empty() && !ys.empty()) {
        pts.emplace_back(m.make_point(parse_coords(xs)), m.make_point(parse_coords(ys)));
    } else {
        lil::PathRng rng(c.seed, 0);
        for (int i = 0; i < pairs; ++i) {
            auto mk = [&](uint64_t idx) {
                if (m.kind() == lil::ManifoldKind::Sphere2) {
                    auto z01 = rng.normal_pair(3 * idx, true);
                    auto z23 = rng.normal_pair(3 * idx + 1, true);
                    return m.make_point({z01[0], z01[1], z23[0]});
                }
                std::vector<double> coords;
                for (size_t a = 0; a < m.lengths().size(); ++a) {
                    auto u = rng.uniform_pair(16 * idx + a, true);
                    coords.push_back(u[0] * m.lengths()[a]);
                }
                return m.make_point(coords);
            };
            pts.emplace_back(mk(static_cast<uint64_t>(2 * i)), mk(static_cast<uint64_t>(2 * i + 1)));
        }
    }

    std::string csv = lil::meta_header(lil::config_hash(eff), c.seed);
    csv += "alpha,x,y,spectral,timeint,abs_diff\n";
    bool ok = true;
    const char* label = alpha == 1.0 ? "Green kernel g" : "g_alpha";
    for (auto& [x, y] : pts) {
        double s = 0.0, ti = 0.0;
        bool have_s = route != "timeint", have_t = route != "spectral";
        if (have_s) s = lil::kernel_g_alpha_spectral(m, alpha, x, y, trunc).value;
        if (have_t) ti = lil::kernel_g_alpha_timeint(m, alpha, x, y, trunc).value;
        double diff = (have_s && have_t) ? std::abs(s - ti) : 0.0;
        if (have_s && have_t && diff > tol * std::max({1.0, std::abs(s), std::abs(ti)})) ok = false;
        auto coord_str = [](const lil::Point& p) {
            std::string out;
            for (size_t i = 0; i < p.coords.size(); ++i)
                out += (i ? ";" : "") + lil::format_double(p.coords[i]);
            return out;
        };
        csv += lil::format_double(alpha) + "," + coord_str(x) + "," + coord_str(y) + "," +
               (have_s ? lil::format_double(s) : "") + "," + (have_t ? lil::format_double(ti) : "") +
               "," + lil::format_double(diff) + "\n";
    }
    lil::write_atomic(c.out("green_kernel.csv"), csv);
    std::cout << label << ": " << pts.size() << " evaluation(s), route=" << route
              << (route == "both" ? (ok ? ", routes agree" : ", ROUTE MISMATCH") : "") << "\n";
    return ok ? 0 : 1;
}

int cmd_green_apply(const Common& c, double alpha, const std::string& f_file) {
    auto f = lil::spectral_function_from_json(load_json_file(f_file));
    auto out_f = lil::apply_G_alpha(f, alpha);
    json eff = {{"cmd", "green-apply"}, {"alpha", alpha}, {"f", lil::to_json(f)}, {"seed", c.seed}};
    json out = {{"meta", lil::meta_json(lil::config_hash(eff), c.seed)},
                {"alpha", alpha},
                {"result", lil::to_json(out_f)}};
    lil::write_atomic(c.out("green_apply.json"), out.dump(2) + "\n");
    return 0;
}

int cmd_green_semigroup(const Common& c, const std::string& manifold_file, double alpha,
                        double beta, int modes) {
    auto m = resolve_manifold(c, manifold_file);
    lil::PathRng rng(c.seed, 0);
    lil::SpectralFunction f;
    f.manifold = m;
    f.coeffs.assign(static_cast<size_t>(modes) + 1, 0.0);
    for (int n = 1; n <= modes; ++n)
        f.coeffs[static_cast<size_t>(n)] = rng.normal_pair(static_cast<uint64_t>(n), true)[0];
    auto rep = lil::semigroup_check(alpha, beta, f);
    json eff = {{"cmd", "green-semigroup"}, {"manifold", lil::to_json(m)}, {"alpha", alpha},
                {"beta", beta},             {"modes", modes},             {"seed", c.seed}};
    json out = {{"meta", lil::meta_json(lil::config_hash(eff), c.seed)},
                {"max_rel_error", rep.max_rel_error},
                {"pass", rep.pass}};
    lil::write_atomic(c.out("green_semigroup.json"), out.dump(2) + "\n");
    std::cout << "semigroup max relative error " << rep.max_rel_error << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_simulate(const Common& c, int paths) {
    if (!c.cfg.contains("manifold"))
        throw std::invalid_argument("simulate: --config with a sim-config JSON is required");
    json cc = c.cfg;
    if (cc.contains("paths")) {
        if (paths == 1) paths = cc.at("paths").get<int>();
        cc.erase("paths");
    }
    lil::SimConfig cfg = lil::sim_config_from_json(cc);
    json eff = {{"cmd", "simulate"}, {"sim", lil::to_json(cfg)}, {"paths", paths}};
    uint64_t h = lil::config_hash(eff);
    lil::Simulator sim(cfg);
    auto ens = sim.run_ensemble(paths, c.threads);
    lil::write_atomic(c.out("checkpoints.csv"), lil::checkpoint_csv(ens, cfg, h));
    json states = json::array();
    for (const auto& p : ens.paths) states.push_back(lil::to_json(p.final_state));
    json out = {{"meta", lil::meta_json(h, cfg.seed)}, {"states", states}};
    lil::write_atomic(c.out("final_states.json"), out.dump(2) + "\n");
    std::cout << "wrote checkpoints.csv (" << paths << " paths, t_max " << cfg.t_max << ")\n";
    return 0;
}

int cmd_lil(const Common& c, const std::string& manifold_file, const std::string& f_name,
            double T, double t0, int seeds, double h) {
    auto m = resolve_manifold(c, manifold_file);
    auto f = named_observable(m, f_name);
    double sigma = lil::lil_sigma(f);
    auto cfg = base_sim_config(m, T, h, c.seed, {f});
    json eff = {{"cmd", "lil"}, {"sim", lil::to_json(cfg)}, {"f", f_name},
                {"T", T},       {"t0", t0},                 {"seeds", seeds}};
    uint64_t hash = lil::config_hash(eff);
    lil::Simulator sim(cfg);
    auto ens = sim.run_ensemble(seeds, c.threads);
    std::string csv = lil::meta_header(hash, c.seed);
    csv += "path_id,T,running_max,ratio_to_sigma\n";
    for (const auto& p : ens.paths) {
        auto rows = lil::running_limsup(p.checkpoints, 0, sigma, t0);
        for (const auto& r : rows)
            csv += std::to_string(p.path_id) + "," + lil::format_double(r.t) + "," +
                   lil::format_double(r.running_max) + "," + lil::format_double(r.ratio_to_sigma) + "\n";
    }
    lil::write_atomic(c.out("limsup.csv"), csv);
    std::cout << "sigma_f = " << sigma << ", wrote limsup.csv\n";
    return 0;
}

int cmd_cluster(const Common& c, const std::string& manifold_file, int n, double T, int seeds,
                double h, double inflation, double t_min) {
    auto m = resolve_manifold(c, manifold_file);
    auto basis = lil::make_basis(m, n);
    auto e = lil::ellipsoid_from(basis.functions, m);
    auto cfg = base_sim_config(m, T, h, c.seed, basis.functions);
    json eff = {{"cmd", "cluster"}, {"sim", lil::to_json(cfg)}, {"n", n},
                {"T", T},           {"seeds", seeds},           {"inflation", inflation},
                {"t_min", t_min}};
    uint64_t hash = lil::config_hash(eff);
    lil::Simulator sim(cfg);
    auto ens = sim.run_ensemble(seeds, c.threads);

    std::string csv = lil::meta_header(hash, c.seed);
    csv += "path_id,t";
    for (int k = 1; k <= n; ++k) csv += ",v" + std::to_string(k);
    csv += ",form_value,member\n";
    json reports = json::array();
    for (const auto& p : ens.paths) {
        auto cloud = lil::cluster_cloud(p.checkpoints, n);
        for (size_t i = 0; i < cloud.times.size(); ++i) {
            auto bm = lil::ball_membership(cloud.v[i], e);
            csv += std::to_string(p.path_id) + "," + lil::format_double(cloud.times[i]);
            for (double v : cloud.v[i]) csv += "," + lil::format_double(v);
            csv += "," + lil::format_double(bm.form_value) + "," + (bm.member ? "1" : "0");
            csv += "\n";
        }
        auto rep = lil::analyze_cloud(cloud, e, inflation, t_min, m.volume());
        reports.push_back({{"path_id", p.path_id},
                           {"containment_fraction", rep.containment_fraction},
                           {"max_form_value", rep.max_form_value},
                           {"angular_bins_covered", rep.angular_bins_covered},
                           {"angular_bins_total", rep.angular_bins_total}});
    }
    lil::write_atomic(c.out("cloud.csv"), csv);
    json out = {{"meta", lil::meta_json(hash, c.seed)}, {"per_path", reports}};
    lil::write_atomic(c.out("cluster_report.json"), out.dump(2) + "\n");
    std::cout << "wrote cloud.csv and cluster_report.json\n";
    return 0;
}

int cmd_chase(const Common& c, const std::string& manifold_file, const std::string& target_s,
              const std::string& eps_s, double budget, int seeds, double h) {
    auto m = resolve_manifold(c, manifold_file);
    auto target = parse_coords(target_s);
    auto eps = parse_coords(eps_s);
    const int n = static_cast<int>(target.size());
    if (eps.size() == 1 && n > 1) eps.assign(static_cast<size_t>(n), eps[0]);
    auto basis = lil::make_basis(m, n);
    auto e = lil::ellipsoid_from(basis.functions, m);
    auto cfg = base_sim_config(m, budget, h, c.seed, basis.functions);
    json eff = {{"cmd", "chase"}, {"sim", lil::to_json(cfg)}, {"target", target},
                {"eps", eps},     {"budget", budget},         {"seeds", seeds}};
    uint64_t hash = lil::config_hash(eff);
    lil::Simulator sim(cfg);
    auto ens = sim.run_ensemble(seeds, c.threads);
    json reports = json::array();
    bool all_ok = true;
    for (const auto& p : ens.paths) {
        auto res = lil::chase_target(p.checkpoints, target, eps, e, budget);
        json r = lil::to_json(res);
        r["path_id"] = p.path_id;
        reports.push_back(r);
        all_ok = all_ok && res.success;
    }
    json out = {{"meta", lil::meta_json(hash, c.seed)}, {"per_path", reports}};
    lil::write_atomic(c.out("chase_report.json"), out.dump(2) + "\n");
    std::cout << (all_ok ? "all paths reached the target schedule\n"
                         : "budget exhausted on some paths (see chase_report.json)\n");
    return all_ok ? 0 : kExitBudget;
}

int cmd_characterize(const Common& c, const std::string& density_file) {
    json j = density_file.empty() ? c.cfg.at("density") : load_json_file(density_file);
    lil::CandidateDensity g{lil::spectral_function_from_json(j)};
    auto rep = lil::check(g, g.g.manifold);
    json eff = {{"cmd", "characterize"}, {"density", lil::to_json(g.g)}, {"seed", c.seed}};
    json out = {{"meta", lil::meta_json(lil::config_hash(eff), c.seed)},
                {"report", lil::to_json(rep)}};
    lil::write_atomic(c.out("characterize_report.json"), out.dump(2) + "\n");
    std::cout << (rep.member ? "member" : "not a member")
              << " (||G_{1/2}^{-1} g|| = " << rep.g_half_inv_norm << ", threshold "
              << rep.threshold << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral operators and Brownian occupation statistics on compact manifolds"};
    app.set_version_flag("--version", lil::kVersion);
    app.require_subcommand(1);

    Common common;
    app.add_option("--config", common.config_path, "JSON config file");
    app.add_option("--seed", common.seed, "base RNG seed");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--threads", common.threads, "worker threads for ensembles");

    std::string manifold_file, xs, ys, route = "both", f_name = "phi1";
    std::string target_s = "0", eps_s = "0.05", density_file;
    int N = 0, pairs = 10, n_obs = 2, seeds = 1, sim_paths = 1, sg_modes = 20;
    double t = 1.0, alpha = 1.0, beta = 1.0, T = 1e5, t0 = 100.0, h = 0.1;
    double budget = 1e5, inflation = 0.25, t_min = 1e3, tol = 1e-6;

    auto* sp = app.add_subcommand("spectra", "dump eigenpairs as CSV");
    sp->add_option("--manifold", manifold_file);
    sp->add_option("--N", N, "nonconstant modes (0 allowed: constant only)");

    auto* hk = app.add_subcommand("heat-kernel", "evaluate the truncated heat kernel");
    hk->add_option("--manifold", manifold_file);
    hk->add_option("--N", N);
    hk->add_option("--t", t)->required();
    hk->add_option("--x", xs)->required();
    hk->add_option("--y", ys)->required();

    auto* gr = app.add_subcommand("green", "Green kernels and operators");
    auto* grk = gr->add_subcommand("kernel", "evaluate g_alpha by one or both routes");
    grk->add_option("--manifold", manifold_file);
    grk->add_option("--N", N);
    grk->add_option("--alpha", alpha);
    grk->add_option("--x", xs);
    grk->add_option("--y", ys);
    grk->add_option("--route", route)->check(CLI::IsMember({"spectral", "timeint", "both"}));
    grk->add_option("--pairs", pairs, "random point pairs when --x/--y absent");
    grk->add_option("--tol", tol, "route agreement tolerance");
    auto* gra = gr->add_subcommand("apply", "apply G_alpha to a spectral function");
    gra->add_option("--alpha", alpha);
    gra->add_option("--f", density_file, "spectral function JSON")->required();
    auto* grs = gr->add_subcommand("semigroup", "verify G_beta G_alpha = G_{alpha+beta}");
    grs->add_option("--manifold", manifold_file);
    grs->add_option("--alpha", alpha);
    grs->add_option("--beta", beta);
    grs->add_option("--modes", sg_modes);
    gr->require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run a Brownian ensemble from a config");
    sim->add_option("--paths", sim_paths);

    auto* ll = app.add_subcommand("lil", "running max of mu_t(f) against sigma_f");
    ll->add_option("--manifold", manifold_file);
    ll->add_option("--f", f_name, "observable: phi<k>, f<k>");
    ll->add_option("--T", T);
    ll->add_option("--t0", t0);
    ll->add_option("--seeds", seeds);
    ll->add_option("--h", h);

    auto* cl = app.add_subcommand("cluster", "checkpoint cloud vs the limit ball");
    cl->add_option("--manifold", manifold_file);
    cl->add_option("--n", n_obs);
    cl->add_option("--T", T);
    cl->add_option("--seeds", seeds);
    cl->add_option("--h", h);
    cl->add_option("--inflation", inflation);
    cl->add_option("--t-min", t_min);

    auto* ch = app.add_subcommand("chase", "diagonal time selection toward a target");
    ch->add_option("--manifold", manifold_file);
    ch->add_option("--target", target_s, "comma-separated target vector");
    ch->add_option("--eps", eps_s, "tolerance schedule (single value broadcasts)");
    ch->add_option("--budget", budget);
    ch->add_option("--seeds", seeds);
    ch->add_option("--h", h);

    auto* cz = app.add_subcommand("characterize", "membership report for a density");
    cz->add_option("--density", density_file, "spectral function JSON file");

    CLI11_PARSE(app, argc, argv);

    try {
        common.load();
        if (*sp) return cmd_spectra(common, manifold_file, N);
        if (*hk) return cmd_heat_kernel(common, manifold_file, N, t, xs, ys);
        if (*grk) return cmd_green_kernel(common, manifold_file, N, alpha, xs, ys, route, pairs, tol);
        if (*gra) return cmd_green_apply(common, alpha, density_file);
        if (*grs) return cmd_green_semigroup(common, manifold_file, alpha, beta, sg_modes);
        if (*sim) return cmd_simulate(common, sim_paths);
        if (*ll) return cmd_lil(common, manifold_file, f_name, T, t0, seeds, h);
        if (*cl) return cmd_cluster(common, manifold_file, n_obs, T, seeds, h, inflation, t_min);
        if (*ch) return cmd_chase(common, manifold_file, target_s, eps_s, budget, seeds, h);
        if (*cz) return cmd_characterize(common, density_file);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitBadConfig;
    }
    return kExitBadConfig;
}
