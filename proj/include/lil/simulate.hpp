#ifndef LIL_SIMULATE_HPP
#define LIL_SIMULATE_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "lil/manifold.hpp"
#include "lil/rng.hpp"
#include "lil/spectral.hpp"

namespace lil {

enum class StartMode { Fixed, Uniform };

/// Geometric checkpoint times first, first*ratio, first*ratio^2, ...
/// The limsup structure lives on exponential time scales, so uniform grids
/// waste the budget.
struct CheckpointSchedule {
    double first = 3.0;
    double ratio = 1.05;
};

struct SimConfig {
    ManifoldSpec manifold;
    Point start;
    StartMode start_mode = StartMode::Fixed;
    double step_h = 0.01;  // must be in (0, 0.1]
    double t_max = 0.0;
    uint64_t seed = 1;
    std::vector<SpectralFunction> observables;
    CheckpointSchedule checkpoints;

    void validate() const;
};

/// A trajectory in flight. Time is step_index * h; occupation holds the
/// trapezoid accumulators L_t(f_k); prev_values caches f_k at the current
/// position so resumed segments reproduce a single long run bitwise.
struct PathState {
    uint64_t path_id = 0;
    uint64_t step_index = 0;
    Point position;
    std::vector<double> occupation;
    std::vector<double> prev_values;

    double time(double h) const { return static_cast<double>(step_index) * h; }
};

struct Checkpoint {
    double t = 0.0;
    std::vector<double> mu;          // mu_t(f_k)
    std::vector<double> occupation;  // L_t(f_k)
    Point position;
};

struct PathResult {
    uint64_t path_id = 0;
    std::vector<Checkpoint> checkpoints;
    PathState final_state;
};

struct EnsembleResult {
    std::vector<PathResult> paths;
};

/// Brownian-path engine for a fixed configuration. Circle/torus steps use
/// the exact wrapped-Gaussian transition (variance h per coordinate);
/// sphere steps take a tangent-plane Gaussian of covariance h I_2 through
/// the geodesic exponential map followed by renormalization (weak order 1).
class Simulator {
public:
    explicit Simulator(SimConfig cfg);

    const SimConfig& config() const { return cfg_; }

    PathState init_path(uint64_t path_id) const;

    /// Advance one step of size h. Throws once time + h would pass t_max.
    void step(PathState& s) const;

    /// Trapezoid bookkeeping only: move to `next` as the result of one
    /// h-step, updating every occupation accumulator. step() routes through
    /// this; tests drive it directly with deterministic paths.
    void advance_to(PathState& s, const Point& next) const;

    /// mu_t(f_k) = (L_t(f_k) - t f0_k / sqrt(m0)) / sqrt(2 t log log t).
    /// Defined for t >= 3 only.
    double mu(const PathState& s, int k) const;

    const std::vector<uint64_t>& checkpoint_steps() const { return cp_steps_; }

    PathResult run_path(uint64_t path_id) const;

    /// Deterministic for fixed (seed, n_paths) regardless of thread count:
    /// path j always uses the stream derived from (seed, j).
    EnsembleResult run_ensemble(int n_paths, int threads = 1) const;

private:
    Point sample_start(const PathRng& rng) const;
    void eval_observables(const Point& x, std::vector<double>& out) const;

    SimConfig cfg_;
    std::unique_ptr<EigenBasis> basis_;                      // up to max observable mode
    std::vector<std::vector<std::pair<int, double>>> obs_nz_;  // nonzero coefficients
    std::vector<double> obs_f0_;
    double m0_ = 0.0;
    double sqrt_h_ = 0.0;
    uint64_t n_steps_ = 0;
    std::vector<uint64_t> cp_steps_;
};

}  // namespace lil

#endif  // LIL_SIMULATE_HPP
