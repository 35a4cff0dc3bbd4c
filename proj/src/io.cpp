#include "lil/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lil {

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const char* context) {
    if (!j.is_object())
        throw std::invalid_argument(std::string(context) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument(std::string(context) + ": unknown key '" + it.key() + "'");
    }
}

json to_json(const ManifoldSpec& m) {
    switch (m.kind()) {
        case ManifoldKind::Circle: return {{"kind", "circle"}, {"L", m.lengths()[0]}};
        case ManifoldKind::FlatTorus: return {{"kind", "flat_torus"}, {"L", m.lengths()}};
        case ManifoldKind::Sphere2: return {{"kind", "sphere2"}};
    }
    throw std::logic_error("unreachable");
}

ManifoldSpec manifold_from_json(const json& j) {
    require_keys(j, {"kind", "L"}, "manifold");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw std::invalid_argument("manifold: missing string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "circle") {
        if (!j.contains("L")) throw std::invalid_argument("manifold: circle needs 'L'");
        return ManifoldSpec::circle(j["L"].get<double>());
    }
    if (kind == "flat_torus") {
        if (!j.contains("L") || !j["L"].is_array())
            throw std::invalid_argument("manifold: flat_torus needs array 'L'");
        return ManifoldSpec::flat_torus(j["L"].get<std::vector<double>>());
    }
    if (kind == "sphere2") {
        if (j.contains("L")) throw std::invalid_argument("manifold: sphere2 takes no 'L'");
        return ManifoldSpec::sphere2();
    }
    throw std::invalid_argument("manifold: unknown kind '" + kind + "'");
}

json to_json(const SpectralFunction& f) {
    json coeffs = json::array();
    for (size_t n = 0; n < f.coeffs.size(); ++n)
        if (f.coeffs[n] != 0.0) coeffs.push_back({{"n", n}, {"c", f.coeffs[n]}});
    return {{"manifold", to_json(f.manifold)}, {"coeffs", coeffs}};
}

SpectralFunction spectral_function_from_json(const json& j) {
    require_keys(j, {"manifold", "coeffs"}, "spectral function");
    SpectralFunction f;
    f.manifold = manifold_from_json(j.at("manifold"));
    if (!j.contains("coeffs") || !j["coeffs"].is_array())
        throw std::invalid_argument("spectral function: missing array 'coeffs'");
    int max_n = -1;
    for (const auto& e : j["coeffs"]) {
        require_keys(e, {"n", "c"}, "coefficient");
        max_n = std::max(max_n, e.at("n").get<int>());
    }
    f.coeffs.assign(static_cast<size_t>(max_n + 1), 0.0);
    for (const auto& e : j["coeffs"]) {
        int n = e.at("n").get<int>();
        if (n < 0) throw std::invalid_argument("spectral function: negative mode index");
        f.coeffs[static_cast<size_t>(n)] = e.at("c").get<double>();
    }
    return f;
}

json to_json(const PathState& s) {
    return {{"path_id", s.path_id},
            {"step_index", s.step_index},
            {"position", s.position.coords},
            {"occupation", s.occupation},
            {"prev_values", s.prev_values}};
}

PathState path_state_from_json(const json& j) {
    require_keys(j, {"path_id", "step_index", "position", "occupation", "prev_values"},
                 "path state");
    PathState s;
    s.path_id = j.at("path_id").get<uint64_t>();
    s.step_index = j.at("step_index").get<uint64_t>();
    s.position.coords = j.at("position").get<std::vector<double>>();
    s.occupation = j.at("occupation").get<std::vector<double>>();
    s.prev_values = j.at("prev_values").get<std::vector<double>>();
    return s;
}

namespace {

SpectralFunction observable_from_json(const json& e, const ManifoldSpec& m) {
    if (e.is_string()) {
        // shorthand: "phi<k>" for the raw mode, "f<k>" for sqrt(lambda_k/2) phi_k
        const std::string s = e.get<std::string>();
        bool green = s.rfind("f", 0) == 0;
        bool phi = s.rfind("phi", 0) == 0;
        if (!green && !phi)
            throw std::invalid_argument("observable: unknown shorthand '" + s + "'");
        int k = std::stoi(s.substr(phi ? 3 : 1));
        if (k < 1) throw std::invalid_argument("observable: mode index must be >= 1");
        if (phi) return SpectralFunction::basis_mode(m, k);
        EigenBasis basis(m, SpectralTruncation(k));
        return SpectralFunction::basis_mode(m, k, std::sqrt(basis.lambda(k) / 2.0));
    }
    SpectralFunction f = spectral_function_from_json(e);
    if (!(f.manifold == m))
        throw std::invalid_argument("observable: manifold differs from simulation manifold");
    return f;
}

}  // namespace

json to_json(const SimConfig& c) {
    json obs = json::array();
    for (const auto& f : c.observables) obs.push_back(to_json(f));
    return {{"manifold", to_json(c.manifold)},
            {"start", c.start.coords},
            {"start_mode", c.start_mode == StartMode::Fixed ? "fixed" : "uniform"},
            {"h", c.step_h},
            {"t_max", c.t_max},
            {"seed", c.seed},
            {"observables", obs},
            {"checkpoint_first", c.checkpoints.first},
            {"checkpoint_ratio", c.checkpoints.ratio}};
}

SimConfig sim_config_from_json(const json& j) {
    require_keys(j,
                 {"manifold", "start", "start_mode", "h", "t_max", "seed", "observables",
                  "checkpoint_first", "checkpoint_ratio"},
                 "sim config");
    SimConfig c;
    c.manifold = manifold_from_json(j.at("manifold"));
    if (j.contains("start"))
        c.start = c.manifold.make_point(j.at("start").get<std::vector<double>>());
    else if (c.manifold.kind() == ManifoldKind::Sphere2)
        c.start = c.manifold.make_point({0.0, 0.0, 1.0});
    else
        c.start = c.manifold.make_point(std::vector<double>(c.manifold.lengths().size(), 0.0));
    if (j.contains("start_mode")) {
        const std::string sm = j.at("start_mode").get<std::string>();
        if (sm == "fixed")
            c.start_mode = StartMode::Fixed;
        else if (sm == "uniform")
            c.start_mode = StartMode::Uniform;
        else
            throw std::invalid_argument("sim config: start_mode must be fixed|uniform");
    }
    if (j.contains("h")) c.step_h = j.at("h").get<double>();
    c.t_max = j.at("t_max").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("observables"))
        for (const auto& e : j.at("observables"))
            c.observables.push_back(observable_from_json(e, c.manifold));
    if (j.contains("checkpoint_first")) c.checkpoints.first = j.at("checkpoint_first").get<double>();
    if (j.contains("checkpoint_ratio")) c.checkpoints.ratio = j.at("checkpoint_ratio").get<double>();
    c.validate();
    return c;
}

json to_json(const CheckReport& r) {
    return {{"cond_a", r.cond_a},
            {"cond_b", r.cond_b},
            {"cond_c", r.cond_c},
            {"cond_d", r.cond_d},
            {"l2_norm", r.l2_norm},
            {"g_half_inverse_norm", r.g_half_inv_norm},
            {"threshold", r.threshold},
            {"margin", r.threshold - r.g_half_inv_norm},
            {"member", r.member}};
}

json to_json(const TargetChaseResult& r) {
    return {{"target", r.target},
            {"tolerances", r.tolerances},
            {"achieved_times", r.achieved_times},
            {"achieved_errors", r.achieved_errors},
            {"best_errors", r.best_errors},
            {"budget", r.budget},
            {"success", r.success}};
}

uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

std::string meta_header(uint64_t cfg_hash, uint64_t seed) {
    char buf[128];
    snprintf(buf, sizeof(buf), "# version: %s\n# config_hash: %016llx\n# seed: %llu\n",
             kVersion, static_cast<unsigned long long>(cfg_hash),
             static_cast<unsigned long long>(seed));
    return buf;
}

json meta_json(uint64_t cfg_hash, uint64_t seed) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(cfg_hash));
    return {{"version", kVersion}, {"config_hash", buf}, {"seed", seed}};
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string checkpoint_csv(const EnsembleResult& ensemble, const SimConfig& cfg,
                           uint64_t cfg_hash) {
    std::string out = meta_header(cfg_hash, cfg.seed);
    out += "t,path_id";
    for (size_t k = 0; k < cfg.observables.size(); ++k) out += ",mu_f" + std::to_string(k + 1);
    for (size_t k = 0; k < cfg.observables.size(); ++k) out += ",L_f" + std::to_string(k + 1);
    size_t dim = cfg.manifold.kind() == ManifoldKind::Sphere2 ? 3 : cfg.manifold.lengths().size();
    for (size_t i = 0; i < dim; ++i) out += ",x" + std::to_string(i);
    out += "\n";
    for (const auto& path : ensemble.paths) {
        for (const auto& cp : path.checkpoints) {
            out += format_double(cp.t) + "," + std::to_string(path.path_id);
            for (double v : cp.mu) out += "," + format_double(v);
            for (double v : cp.occupation) out += "," + format_double(v);
            for (double v : cp.position.coords) out += "," + format_double(v);
            out += "\n";
        }
    }
    return out;
}

std::string eigenpair_csv(const std::vector<EigenPair>& pairs, uint64_t cfg_hash,
                          uint64_t seed) {
    std::string out = meta_header(cfg_hash, seed);
    out += "n,lambda,label\n";
    for (const auto& p : pairs)
        out += std::to_string(p.n) + "," + format_double(p.lambda) + "," + p.label() + "\n";
    return out;
}

std::string cloud_csv(const ClusterCloud& cloud, const EllipsoidSpec& e,
                      uint64_t cfg_hash, uint64_t seed) {
    std::string out = meta_header(cfg_hash, seed);
    out += "t";
    for (int k = 0; k < e.dim(); ++k) out += ",v" + std::to_string(k + 1);
    out += ",form_value,member\n";
    for (size_t i = 0; i < cloud.times.size(); ++i) {
        auto bm = ball_membership(cloud.v[i], e);
        out += format_double(cloud.times[i]);
        for (double v : cloud.v[i]) out += "," + format_double(v);
        out += "," + format_double(bm.form_value) + "," + (bm.member ? std::string("1") : std::string("0"));
        out += "\n";
    }
    return out;
}

std::string limsup_csv(const std::vector<RunningLimsupRow>& rows, uint64_t cfg_hash,
                       uint64_t seed) {
    std::string out = meta_header(cfg_hash, seed);
    out += "T,running_max,ratio_to_sigma\n";
    for (const auto& r : rows)
        out += format_double(r.t) + "," + format_double(r.running_max) + "," +
               format_double(r.ratio_to_sigma) + "\n";
    return out;
}

}  // namespace lil
