#ifndef LIL_MANIFOLD_HPP
#define LIL_MANIFOLD_HPP

#include <span>
#include <string>
#include <vector>

namespace lil {

/// Supported compact manifolds. The circle and flat torus carry exact
/// wrapped-Gaussian Brownian transitions and a trigonometric eigenbasis;
/// the unit 2-sphere carries the spherical-harmonic eigenbasis.
enum class ManifoldKind { Circle, FlatTorus, Sphere2 };

struct Point {
    // circle/torus: one angle per coordinate, reduced to [0, L_i);
    // sphere: a unit 3-vector.
    std::vector<double> coords;
};

class ManifoldSpec {
public:
    static ManifoldSpec circle(double circumference);
    static ManifoldSpec flat_torus(std::vector<double> side_lengths);
    static ManifoldSpec sphere2();

    ManifoldKind kind() const { return kind_; }
    int dimension() const;
    const std::vector<double>& lengths() const { return lengths_; }

    /// Total volume m0 of the manifold.
    double volume() const;

    /// Canonical point constructor: wraps circle/torus coordinates modulo
    /// the side lengths; normalizes sphere vectors (rejects near-zero input).
    Point make_point(std::vector<double> coords) const;

    bool operator==(const ManifoldSpec&) const = default;

private:
    ManifoldKind kind_ = ManifoldKind::Circle;
    std::vector<double> lengths_;  // circle: {L}; torus: {L_1..L_d}; sphere: {}
};

/// One eigenpair of -Laplacian. Index 0 is always the constant mode
/// phi_0 = m0^{-1/2} with lambda_0 = 0. The evaluator handle is the
/// closed-form mode descriptor: a wave vector plus cos/sin choice on the
/// circle/torus, a spherical-harmonic degree/order (l, m) on the sphere.
struct EigenPair {
    int n = 0;
    double lambda = 0.0;
    std::vector<int> wave;  // circle/torus canonical wave vector (empty on sphere)
    bool sine = false;      // circle/torus: sin component of the wave-vector class
    int l = 0;              // sphere degree
    int m = 0;              // sphere order (m<0: sin harmonics, m>0: cos)
    std::string label() const;
};

/// Number of nonconstant modes retained (0 keeps only the constant mode).
struct SpectralTruncation {
    int n_modes = 0;
    explicit SpectralTruncation(int n);
};

/// Per-manifold default truncation: 128 modes on the circle, all wave
/// vectors with per-axis frequency <= 64 on the torus, degree l <= 20 on
/// the sphere.
SpectralTruncation default_truncation(const ManifoldSpec& m);

double volume(const ManifoldSpec& m);

/// Eigenpairs 0..N ordered by (lambda, tie-break). Tie-break inside a
/// multiplicity block: cosine before sine, lexicographic in wave vector
/// on the circle/torus; (l, m=-l..l) on the sphere.
std::vector<EigenPair> eigenpairs(const ManifoldSpec& m, SpectralTruncation trunc);

double eval_eigenfunction(const ManifoldSpec& m, int n, const Point& x);

double geodesic_distance(const ManifoldSpec& m, const Point& x, const Point& y);

struct HeatKernelResult {
    double value = 0.0;
    /// Certified bound on the dropped spectral tail
    /// sum_{n>N} e^{-lambda_n t/2} sup|phi_n|^2.
    double tail_bound = 0.0;
};

/// Truncated heat kernel p_N(t,x,y) = sum_{n<=N} e^{-lambda_n t/2}
/// phi_n(x) phi_n(y). Throws for t <= 0 and for t < 1e-4 (the truncated
/// series loses positivity there; raise N and evaluate the series directly
/// if smaller times are needed).
HeatKernelResult heat_kernel(const ManifoldSpec& m, double t, const Point& x,
                             const Point& y, SpectralTruncation trunc);

struct MixingProfile {
    std::vector<double> t;
    std::vector<double> sup_deviation;  // sup_x |p_N(t,x,x) - 1/m0| over a lattice
    double fitted_log_slope = 0.0;      // least-squares slope of log sup vs t
    double reference_rate = 0.0;        // -lambda_1/2
};

MixingProfile mixing_decay_profile(const ManifoldSpec& m, SpectralTruncation trunc,
                                   const std::vector<double>& t_grid);

/// Evaluation engine for a fixed manifold and truncation. All methods are
/// const and safe for concurrent use; eval_all fills phi_0..phi_N at a point
/// using per-axis trigonometric recurrences (circle/torus) or the stable
/// normalized associated-Legendre recurrence (sphere).
class EigenBasis {
public:
    EigenBasis(const ManifoldSpec& m, SpectralTruncation trunc);

    const ManifoldSpec& manifold() const { return manifold_; }
    int size() const { return static_cast<int>(modes_.size()); }  // N+1
    double lambda(int n) const { return modes_[static_cast<size_t>(n)].lambda; }
    const EigenPair& mode(int n) const { return modes_[static_cast<size_t>(n)]; }
    const std::vector<EigenPair>& modes() const { return modes_; }

    /// out.size() must be >= size(). Writes phi_n(x) for n = 0..N.
    void eval_all(const Point& x, std::span<double> out) const;
    double eval(int n, const Point& x) const;

    /// lambda of the first mode beyond the truncation (used by tail bounds).
    double lambda_next() const { return lambda_next_; }

private:
    ManifoldSpec manifold_;
    std::vector<EigenPair> modes_;
    double lambda_next_ = 0.0;
    int max_axis_freq_ = 0;  // circle/torus: max |k_i| over retained modes
    int max_degree_ = 0;     // sphere: max l
    std::vector<double> angle_scale_;  // 2 pi / L_i
    double amp_ = 0.0;                 // sqrt(2/m0)
};

struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;  // sum to m0
};

/// Quadrature adapted to the manifold: periodic trapezoid (exact for
/// trigonometric polynomials below the grid Nyquist) on the circle/torus,
/// Gauss-Legendre in cos(theta) times uniform longitude on the sphere.
/// resolution 0 picks the defaults 4096 (circle), 128 per axis (torus),
/// 64x128 (sphere); otherwise it is the per-axis / colatitude count.
QuadratureRule quadrature_rule(const ManifoldSpec& m, int resolution = 0);

}  // namespace lil

#endif  // LIL_MANIFOLD_HPP
