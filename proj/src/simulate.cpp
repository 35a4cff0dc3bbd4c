#include "lil/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace lil {

namespace {

// One Philox block yields two normals; consecutive normal indices share a
// block, so a tiny thread-local cache halves the generator work without
// affecting which bits any index maps to.
struct NormalCache {
    uint64_t seed = 0, path = 0, block = ~0ull;
    bool init = false, valid = false;
    std::array<double, 2> z{};
};
thread_local NormalCache g_normal_cache;

double cached_normal(const PathRng& rng, uint64_t normal_index, bool init_space = false) {
    const uint64_t block = normal_index >> 1;
    NormalCache& c = g_normal_cache;
    if (!c.valid || c.seed != rng.seed() || c.path != rng.path_id() || c.block != block ||
        c.init != init_space) {
        c.z = rng.normal_pair(block, init_space);
        c.seed = rng.seed();
        c.path = rng.path_id();
        c.block = block;
        c.init = init_space;
        c.valid = true;
    }
    return c.z[normal_index & 1];
}

}  // namespace

void SimConfig::validate() const {
    if (!(step_h > 0.0) || step_h > 0.1)
        throw std::invalid_argument("sim config: step h must be in (0, 0.1]");
    if (!(checkpoints.first >= 3.0))
        throw std::invalid_argument("sim config: first checkpoint must be >= 3");
    if (!(t_max >= checkpoints.first))
        throw std::invalid_argument("sim config: t_max must be >= first checkpoint");
    if (!(checkpoints.ratio > 1.0) || checkpoints.ratio > 2.0)
        throw std::invalid_argument("sim config: checkpoint ratio must be in (1, 2]");
    for (const auto& f : observables)
        if (!(f.manifold == manifold))
            throw std::invalid_argument("sim config: observable lives on a different manifold");
    size_t want = manifold.kind() == ManifoldKind::Sphere2 ? 3u : manifold.lengths().size();
    if (start.coords.size() != want)
        throw std::invalid_argument("sim config: start point dimension mismatch");
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    m0_ = cfg_.manifold.volume();
    sqrt_h_ = std::sqrt(cfg_.step_h);
    n_steps_ = static_cast<uint64_t>(std::floor(cfg_.t_max / cfg_.step_h + 1e-9));

    int max_mode = 0;
    for (const auto& f : cfg_.observables) max_mode = std::max(max_mode, f.max_mode());
    if (!cfg_.observables.empty())
        basis_ = std::make_unique<EigenBasis>(cfg_.manifold, SpectralTruncation(max_mode));
    for (const auto& f : cfg_.observables) {
        std::vector<std::pair<int, double>> nz;
        for (size_t n = 0; n < f.coeffs.size(); ++n)
            if (f.coeffs[n] != 0.0) nz.emplace_back(static_cast<int>(n), f.coeffs[n]);
        obs_nz_.push_back(std::move(nz));
        obs_f0_.push_back(f.coeffs.empty() ? 0.0 : f.coeffs[0]);
    }

    // geometric checkpoint times, realized at the first step boundary >= each
    double t = cfg_.checkpoints.first;
    while (t <= cfg_.t_max * (1.0 + 1e-12)) {
        uint64_t s = static_cast<uint64_t>(std::ceil(t / cfg_.step_h - 1e-9));
        if (s <= n_steps_ && (cp_steps_.empty() || s > cp_steps_.back())) cp_steps_.push_back(s);
        t *= cfg_.checkpoints.ratio;
    }
}

void Simulator::eval_observables(const Point& x, std::vector<double>& out) const {
    out.resize(cfg_.observables.size());
    if (!basis_) return;
    thread_local std::vector<double> vals;
    vals.resize(static_cast<size_t>(basis_->size()));
    basis_->eval_all(x, vals);
    for (size_t k = 0; k < obs_nz_.size(); ++k) {
        double s = 0.0;
        for (const auto& [n, c] : obs_nz_[k]) s += c * vals[static_cast<size_t>(n)];
        out[k] = s;
    }
}

Point Simulator::sample_start(const PathRng& rng) const {
    if (cfg_.start_mode == StartMode::Fixed) return cfg_.start;
    if (cfg_.manifold.kind() == ManifoldKind::Sphere2) {
        double z0 = cached_normal(rng, 0, true);
        double z1 = cached_normal(rng, 1, true);
        double z2 = cached_normal(rng, 2, true);
        double n = std::sqrt(z0 * z0 + z1 * z1 + z2 * z2);
        if (n < 1e-12) return cfg_.manifold.make_point({0.0, 0.0, 1.0});
        return cfg_.manifold.make_point({z0 / n, z1 / n, z2 / n});
    }
    const auto& lengths = cfg_.manifold.lengths();
    std::vector<double> coords(lengths.size());
    for (size_t i = 0; i < lengths.size(); ++i) {
        auto u = rng.uniform_pair(static_cast<uint64_t>(i), true);
        coords[i] = lengths[i] * u[0];
    }
    return cfg_.manifold.make_point(std::move(coords));
}

PathState Simulator::init_path(uint64_t path_id) const {
    PathState s;
    s.path_id = path_id;
    s.step_index = 0;
    PathRng rng(cfg_.seed, path_id);
    s.position = sample_start(rng);
    s.occupation.assign(cfg_.observables.size(), 0.0);
    thread_local std::vector<double> vals;
    eval_observables(s.position, vals);
    s.prev_values = vals;
    return s;
}

void Simulator::advance_to(PathState& s, const Point& next) const {
    thread_local std::vector<double> vals;
    eval_observables(next, vals);
    const double half_h = cfg_.step_h / 2.0;
    for (size_t k = 0; k < s.occupation.size(); ++k)
        s.occupation[k] += half_h * (s.prev_values[k] + vals[k]);
    s.prev_values.swap(vals);
    s.position = next;
    ++s.step_index;
}

void Simulator::step(PathState& s) const {
    if (s.step_index >= n_steps_)
        throw std::out_of_range("step: horizon exceeded (time + h > t_max)");
    PathRng rng(cfg_.seed, s.path_id);

    if (cfg_.manifold.kind() == ManifoldKind::Sphere2) {
        const uint64_t base = 2 * s.step_index;
        const double z1 = cached_normal(rng, base);
        const double z2 = cached_normal(rng, base + 1);
        const auto& p = s.position.coords;
        // deterministic tangent frame: axis least aligned with the position
        int a = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(p[static_cast<size_t>(i)]) < std::abs(p[static_cast<size_t>(a)])) a = i;
        double e1[3] = {0.0, 0.0, 0.0};
        e1[a] = 1.0;
        double dot = e1[0] * p[0] + e1[1] * p[1] + e1[2] * p[2];
        for (int i = 0; i < 3; ++i) e1[i] -= dot * p[static_cast<size_t>(i)];
        double n1 = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
        for (double& v : e1) v /= n1;
        double e2[3] = {p[1] * e1[2] - p[2] * e1[1], p[2] * e1[0] - p[0] * e1[2],
                        p[0] * e1[1] - p[1] * e1[0]};
        double v[3];
        for (int i = 0; i < 3; ++i) v[i] = sqrt_h_ * (z1 * e1[i] + z2 * e2[i]);
        double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        std::vector<double> next(3);
        if (r == 0.0) {
            next = {p[0], p[1], p[2]};
        } else {
            double c = std::cos(r), sn = std::sin(r) / r;
            for (int i = 0; i < 3; ++i) next[static_cast<size_t>(i)] = c * p[static_cast<size_t>(i)] + sn * v[i];
            double norm = std::sqrt(next[0] * next[0] + next[1] * next[1] + next[2] * next[2]);
            for (double& x : next) x /= norm;
        }
        advance_to(s, Point{std::move(next)});
        return;
    }

    const auto& lengths = cfg_.manifold.lengths();
    const int d = static_cast<int>(lengths.size());
    thread_local Point next;
    next.coords = s.position.coords;
    const uint64_t base = s.step_index * static_cast<uint64_t>(d);
    for (int i = 0; i < d; ++i) {
        double z = cached_normal(rng, base + static_cast<uint64_t>(i));
        double x = next.coords[static_cast<size_t>(i)] + sqrt_h_ * z;
        const double L = lengths[static_cast<size_t>(i)];
        x -= L * std::floor(x / L);
        if (x >= L) x = 0.0;
        next.coords[static_cast<size_t>(i)] = x;
    }
    advance_to(s, next);
}

double Simulator::mu(const PathState& s, int k) const {
    const double t = s.time(cfg_.step_h);
    if (t < 3.0)
        throw std::domain_error("mu_t: normalization undefined for t < 3 (log log t <= 0 region)");
    const double denom = std::sqrt(2.0 * t * std::log(std::log(t)));
    const double centered =
        s.occupation[static_cast<size_t>(k)] -
        t * obs_f0_[static_cast<size_t>(k)] / std::sqrt(m0_);
    return centered / denom;
}

PathResult Simulator::run_path(uint64_t path_id) const {
    PathResult res;
    res.path_id = path_id;
    PathState s = init_path(path_id);
    size_t next_cp = 0;
    for (uint64_t i = 0; i < n_steps_; ++i) {
        step(s);
        if (next_cp < cp_steps_.size() && s.step_index == cp_steps_[next_cp]) {
            Checkpoint cp;
            cp.t = s.time(cfg_.step_h);
            cp.occupation = s.occupation;
            cp.mu.resize(cfg_.observables.size());
            for (size_t k = 0; k < cp.mu.size(); ++k) cp.mu[k] = mu(s, static_cast<int>(k));
            cp.position = s.position;
            res.checkpoints.push_back(std::move(cp));
            ++next_cp;
        }
    }
    res.final_state = std::move(s);
    return res;
}

EnsembleResult Simulator::run_ensemble(int n_paths, int threads) const {
    if (n_paths < 1) throw std::invalid_argument("run_ensemble: need at least one path");
    EnsembleResult out;
    out.paths.resize(static_cast<size_t>(n_paths));
    if (threads < 1) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_paths));
    if (threads == 1) {
        for (int j = 0; j < n_paths; ++j) out.paths[static_cast<size_t>(j)] = run_path(static_cast<uint64_t>(j));
        return out;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                int j = next.fetch_add(1);
                if (j >= n_paths) break;
                out.paths[static_cast<size_t>(j)] = run_path(static_cast<uint64_t>(j));
            }
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace lil
