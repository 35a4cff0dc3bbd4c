#include "lil/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace lil {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinHeatTime = 1e-4;

double wrap_coord(double x, double L) {
    double r = x - L * std::floor(x / L);
    if (r >= L) r = 0.0;  // guard against floor rounding at the seam
    return r;
}

}  // namespace

ManifoldSpec ManifoldSpec::circle(double circumference) {
    if (!(circumference > 0.0))
        throw std::invalid_argument("circle: circumference must be positive");
    ManifoldSpec m;
    m.kind_ = ManifoldKind::Circle;
    m.lengths_ = {circumference};
    return m;
}

ManifoldSpec ManifoldSpec::flat_torus(std::vector<double> side_lengths) {
    if (side_lengths.empty())
        throw std::invalid_argument("flat_torus: dimension must be >= 1");
    for (double L : side_lengths)
        if (!(L > 0.0)) throw std::invalid_argument("flat_torus: side lengths must be positive");
    ManifoldSpec m;
    m.kind_ = ManifoldKind::FlatTorus;
    m.lengths_ = std::move(side_lengths);
    return m;
}

ManifoldSpec ManifoldSpec::sphere2() {
    ManifoldSpec m;
    m.kind_ = ManifoldKind::Sphere2;
    m.lengths_ = {};
    return m;
}

int ManifoldSpec::dimension() const {
    switch (kind_) {
        case ManifoldKind::Circle: return 1;
        case ManifoldKind::FlatTorus: return static_cast<int>(lengths_.size());
        case ManifoldKind::Sphere2: return 2;
    }
    return 0;
}

double ManifoldSpec::volume() const {
    switch (kind_) {
        case ManifoldKind::Circle: return lengths_[0];
        case ManifoldKind::FlatTorus: {
            double v = 1.0;
            for (double L : lengths_) v *= L;
            return v;
        }
        case ManifoldKind::Sphere2: return 4.0 * kPi;
    }
    return 0.0;
}

Point ManifoldSpec::make_point(std::vector<double> coords) const {
    if (kind_ == ManifoldKind::Sphere2) {
        if (coords.size() != 3)
            throw std::invalid_argument("sphere point needs 3 coordinates");
        double norm = std::sqrt(coords[0] * coords[0] + coords[1] * coords[1] +
                                coords[2] * coords[2]);
        if (norm < 1e-12)
            throw std::invalid_argument("sphere point: vector too close to zero");
        for (double& c : coords) c /= norm;
        return Point{std::move(coords)};
    }
    if (coords.size() != lengths_.size())
        throw std::invalid_argument("point dimension does not match manifold");
    for (size_t i = 0; i < coords.size(); ++i)
        coords[i] = wrap_coord(coords[i], lengths_[i]);
    return Point{std::move(coords)};
}

double volume(const ManifoldSpec& m) { return m.volume(); }

SpectralTruncation::SpectralTruncation(int n) : n_modes(n) {
    if (n < 0) throw std::invalid_argument("truncation: mode count must be >= 0");
}

SpectralTruncation default_truncation(const ManifoldSpec& m) {
    switch (m.kind()) {
        case ManifoldKind::Circle: return SpectralTruncation(128);
        case ManifoldKind::FlatTorus: {
            // all wave-vector classes with per-axis frequency <= 64
            int d = m.dimension();
            long long lattice = 1;
            for (int i = 0; i < d; ++i) lattice *= 129;  // k_i in [-64, 64]
            return SpectralTruncation(static_cast<int>(lattice - 1));
        }
        case ManifoldKind::Sphere2: return SpectralTruncation(21 * 21 - 1);  // l <= 20
    }
    return SpectralTruncation(0);
}

std::string EigenPair::label() const {
    if (n == 0) return "const";
    if (wave.empty()) {
        return "Y(" + std::to_string(l) + "," + std::to_string(m) + ")";
    }
    std::string s = sine ? "sin[" : "cos[";
    for (size_t i = 0; i < wave.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(wave[i]);
    }
    s += "]";
    return s;
}

namespace {

struct WaveClass {
    std::vector<int> k;
    double lambda;
};

// Canonical wave-vector classes {k, -k} (first nonzero component positive),
// ordered by (lambda, lexicographic k). Doubles the search box until the
// requested count is certified complete: every class outside the box has
// lambda >= (2 pi (B+1) / max L)^2.
std::vector<WaveClass> enumerate_wave_classes(const std::vector<double>& lengths,
                                              int n_classes) {
    const int d = static_cast<int>(lengths.size());
    double Lmax = *std::max_element(lengths.begin(), lengths.end());
    int box = 1;
    while (true) {
        std::vector<WaveClass> classes;
        std::vector<int> k(static_cast<size_t>(d), -box);
        while (true) {
            // canonical: first nonzero component positive
            int first_nonzero = 0;
            bool all_zero = true;
            for (int i = 0; i < d; ++i) {
                if (k[static_cast<size_t>(i)] != 0) {
                    first_nonzero = k[static_cast<size_t>(i)];
                    all_zero = false;
                    break;
                }
            }
            if (!all_zero && first_nonzero > 0) {
                double lam = 0.0;
                for (int i = 0; i < d; ++i) {
                    double w = 2.0 * kPi * k[static_cast<size_t>(i)] / lengths[static_cast<size_t>(i)];
                    lam += w * w;
                }
                classes.push_back({k, lam});
            }
            int axis = d - 1;
            while (axis >= 0) {
                if (++k[static_cast<size_t>(axis)] <= box) break;
                k[static_cast<size_t>(axis)] = -box;
                --axis;
            }
            if (axis < 0) break;
        }
        std::sort(classes.begin(), classes.end(), [](const WaveClass& a, const WaveClass& b) {
            if (a.lambda != b.lambda) return a.lambda < b.lambda;
            return std::lexicographical_compare(a.k.begin(), a.k.end(), b.k.begin(), b.k.end());
        });
        double lambda_outside = std::pow(2.0 * kPi * (box + 1) / Lmax, 2);
        if (static_cast<int>(classes.size()) >= n_classes &&
            (n_classes == 0 || classes[static_cast<size_t>(n_classes - 1)].lambda < lambda_outside)) {
            classes.resize(static_cast<size_t>(n_classes));
            return classes;
        }
        box *= 2;
        if (box > (1 << 22)) throw std::runtime_error("wave enumeration box overflow");
    }
}

std::vector<EigenPair> build_modes(const ManifoldSpec& m, int n_modes, double* lambda_next) {
    std::vector<EigenPair> modes;
    modes.reserve(static_cast<size_t>(n_modes) + 1);
    EigenPair constant;
    constant.n = 0;
    constant.lambda = 0.0;
    modes.push_back(constant);

    if (m.kind() == ManifoldKind::Sphere2) {
        int l = 1, mm = -1;
        while (static_cast<int>(modes.size()) <= n_modes) {
            EigenPair p;
            p.n = static_cast<int>(modes.size());
            p.l = l;
            p.m = mm;
            p.lambda = static_cast<double>(l) * (l + 1);
            modes.push_back(p);
            if (++mm > l) {
                ++l;
                mm = -l;
            }
        }
        if (lambda_next) *lambda_next = static_cast<double>(l) * (l + 1);
        return modes;
    }

    const auto& lengths = m.lengths();
    int n_classes = (n_modes + 1) / 2 + 1;  // one spare class for lambda_next
    auto classes = enumerate_wave_classes(lengths, n_classes);
    for (const auto& c : classes) {
        for (int s = 0; s < 2; ++s) {
            if (static_cast<int>(modes.size()) > n_modes) break;
            EigenPair p;
            p.n = static_cast<int>(modes.size());
            p.lambda = c.lambda;
            p.wave = c.k;
            p.sine = (s == 1);
            modes.push_back(p);
        }
    }
    if (lambda_next) {
        // first excluded mode: either the sin partner of the last retained
        // class or the next class entirely
        size_t last_class = static_cast<size_t>(n_modes == 0 ? 0 : (n_modes - 1) / 2);
        bool split_class = (n_modes % 2 == 1);
        *lambda_next = split_class ? classes[last_class].lambda
                                   : classes[last_class + (n_modes == 0 ? 0 : 1)].lambda;
    }
    return modes;
}

// Normalized associated Legendre P̄_{lm}(cos theta) such that the real
// spherical harmonics Y_{l0} = P̄_{l0}, Y_{l,±m} = sqrt(2) P̄_{lm} {cos,sin}(m phi)
// are orthonormal on the unit sphere. Stable (l,m) recurrence.
void legendre_table(int lmax, double u, double sin_theta, std::vector<double>& out) {
    // out[(l)(l+1)/2 + m] = P̄_{lm}(u), 0 <= m <= l <= lmax
    out.assign(static_cast<size_t>((lmax + 1) * (lmax + 2) / 2), 0.0);
    auto at = [&out](int l, int m) -> double& {
        return out[static_cast<size_t>(l * (l + 1) / 2 + m)];
    };
    at(0, 0) = std::sqrt(1.0 / (4.0 * kPi));
    for (int mm = 1; mm <= lmax; ++mm)
        at(mm, mm) = at(mm - 1, mm - 1) * sin_theta * std::sqrt((2.0 * mm + 1.0) / (2.0 * mm));
    for (int mm = 0; mm < lmax; ++mm)
        at(mm + 1, mm) = u * std::sqrt(2.0 * mm + 3.0) * at(mm, mm);
    for (int mm = 0; mm <= lmax; ++mm) {
        for (int l = mm + 2; l <= lmax; ++l) {
            double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(mm) * mm));
            double b = std::sqrt(((static_cast<double>(l - 1) * (l - 1)) - static_cast<double>(mm) * mm) /
                                 (4.0 * static_cast<double>(l - 1) * (l - 1) - 1.0));
            at(l, mm) = a * (u * at(l - 1, mm) - b * at(l - 2, mm));
        }
    }
}

}  // namespace

std::vector<EigenPair> eigenpairs(const ManifoldSpec& m, SpectralTruncation trunc) {
    return build_modes(m, trunc.n_modes, nullptr);
}

EigenBasis::EigenBasis(const ManifoldSpec& m, SpectralTruncation trunc) : manifold_(m) {
    modes_ = build_modes(m, trunc.n_modes, &lambda_next_);
    for (const auto& p : modes_) {
        for (int ki : p.wave) max_axis_freq_ = std::max(max_axis_freq_, std::abs(ki));
        max_degree_ = std::max(max_degree_, p.l);
    }
    for (double L : m.lengths()) angle_scale_.push_back(2.0 * kPi / L);
    amp_ = std::sqrt(2.0 / m.volume());
}

void EigenBasis::eval_all(const Point& x, std::span<double> out) const {
    const size_t n = modes_.size();
    if (out.size() < n) throw std::invalid_argument("eval_all: output span too small");
    const double m0 = manifold_.volume();
    out[0] = 1.0 / std::sqrt(m0);
    if (n == 1) return;

    if (manifold_.kind() == ManifoldKind::Sphere2) {
        const double u = std::clamp(x.coords[2], -1.0, 1.0);
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - u * u));
        const double phi = std::atan2(x.coords[1], x.coords[0]);
        thread_local std::vector<double> ptab;
        legendre_table(max_degree_, u, sin_theta, ptab);
        thread_local std::vector<double> cms, sms;
        cms.assign(static_cast<size_t>(max_degree_) + 1, 1.0);
        sms.assign(static_cast<size_t>(max_degree_) + 1, 0.0);
        double c1, s1;
        __builtin_sincos(phi, &s1, &c1);
        for (int mm = 1; mm <= max_degree_; ++mm) {
            cms[static_cast<size_t>(mm)] = cms[static_cast<size_t>(mm - 1)] * c1 - sms[static_cast<size_t>(mm - 1)] * s1;
            sms[static_cast<size_t>(mm)] = sms[static_cast<size_t>(mm - 1)] * c1 + cms[static_cast<size_t>(mm - 1)] * s1;
        }
        const double sqrt2 = std::numbers::sqrt2;
        for (size_t i = 1; i < n; ++i) {
            const EigenPair& p = modes_[i];
            double plm = ptab[static_cast<size_t>(p.l * (p.l + 1) / 2 + std::abs(p.m))];
            if (p.m == 0)
                out[i] = plm;
            else if (p.m > 0)
                out[i] = sqrt2 * plm * cms[static_cast<size_t>(p.m)];
            else
                out[i] = sqrt2 * plm * sms[static_cast<size_t>(-p.m)];
        }
        return;
    }

    // circle / torus: per-axis tables of cos/sin(2 pi k x_i / L_i)
    const int d = static_cast<int>(manifold_.lengths().size());
    const int K = max_axis_freq_;
    constexpr int kStackFreq = 128;
    double cbuf[kStackFreq + 1], sbuf[kStackFreq + 1];
    thread_local std::vector<double> ctab, stab;
    double* cbase;
    double* sbase;
    if (d == 1 && K <= kStackFreq) {
        cbase = cbuf;
        sbase = sbuf;
    } else {
        ctab.resize(static_cast<size_t>(d) * (static_cast<size_t>(K) + 1));
        stab.resize(static_cast<size_t>(d) * (static_cast<size_t>(K) + 1));
        cbase = ctab.data();
        sbase = stab.data();
    }
    for (int ax = 0; ax < d; ++ax) {
        const double theta = angle_scale_[static_cast<size_t>(ax)] * x.coords[static_cast<size_t>(ax)];
        double c1, s1;
        __builtin_sincos(theta, &s1, &c1);
        double* c = cbase + static_cast<size_t>(ax) * (static_cast<size_t>(K) + 1);
        double* s = sbase + static_cast<size_t>(ax) * (static_cast<size_t>(K) + 1);
        c[0] = 1.0;
        s[0] = 0.0;
        for (int k = 1; k <= K; ++k) {
            c[k] = c[k - 1] * c1 - s[k - 1] * s1;
            s[k] = s[k - 1] * c1 + c[k - 1] * s1;
        }
    }
    const double amp = amp_;
    if (d == 1) {
        for (size_t i = 1; i < n; ++i) {
            const EigenPair& p = modes_[i];
            const int k = p.wave[0];
            out[i] = amp * (p.sine ? sbase[k] : cbase[k]);
        }
        return;
    }
    for (size_t i = 1; i < n; ++i) {
        const EigenPair& p = modes_[i];
        double re = 1.0, im = 0.0;
        for (int ax = 0; ax < d; ++ax) {
            int k = p.wave[static_cast<size_t>(ax)];
            if (k == 0) continue;
            const size_t idx = static_cast<size_t>(ax) * (static_cast<size_t>(K) + 1) + static_cast<size_t>(std::abs(k));
            const double ck = cbase[idx];
            const double sk = (k > 0) ? sbase[idx] : -sbase[idx];
            const double nre = re * ck - im * sk;
            im = im * ck + re * sk;
            re = nre;
        }
        out[i] = amp * (p.sine ? im : re);
    }
}

double EigenBasis::eval(int n, const Point& x) const {
    if (n < 0 || n >= size()) throw std::out_of_range("eigenfunction index out of range");
    thread_local std::vector<double> buf;
    buf.resize(modes_.size());
    eval_all(x, buf);
    return buf[static_cast<size_t>(n)];
}

double eval_eigenfunction(const ManifoldSpec& m, int n, const Point& x) {
    if (n < 0) throw std::out_of_range("eigenfunction index out of range");
    EigenBasis basis(m, SpectralTruncation(n));
    return basis.eval(n, x);
}

double geodesic_distance(const ManifoldSpec& m, const Point& x, const Point& y) {
    if (m.kind() == ManifoldKind::Sphere2) {
        double dot = 0.0;
        for (int i = 0; i < 3; ++i) dot += x.coords[static_cast<size_t>(i)] * y.coords[static_cast<size_t>(i)];
        return std::acos(std::clamp(dot, -1.0, 1.0));
    }
    const auto& lengths = m.lengths();
    double s = 0.0;
    for (size_t i = 0; i < lengths.size(); ++i) {
        double d = std::abs(x.coords[i] - y.coords[i]);
        d = std::min(d, lengths[i] - d);
        s += d * d;
    }
    return std::sqrt(s);
}

namespace {

// Fully summed 1-d theta value sum_{k in Z} e^{-(2 pi k / L)^2 s}.
double theta_sum(double L, double s) {
    double total = 1.0;
    for (int k = 1;; ++k) {
        double w = 2.0 * kPi * k / L;
        double term = std::exp(-w * w * s);
        total += 2.0 * term;
        if (term < 1e-300) break;
    }
    return total;
}

double heat_tail_bound(const EigenBasis& basis, double t) {
    const ManifoldSpec& m = basis.manifold();
    const double m0 = m.volume();
    if (m.kind() == ManifoldKind::Sphere2) {
        // Modes are grouped in degree blocks; sup|Y_lm|^2 <= (2l+1)/(4 pi).
        int lmax_retained = 0;
        for (const auto& p : basis.modes()) lmax_retained = std::max(lmax_retained, p.l);
        // partially excluded block
        int full_block_end = (lmax_retained + 1) * (lmax_retained + 1);  // modes for l <= lmax
        int excluded_in_block = full_block_end - basis.size();
        double tail = 0.0;
        if (excluded_in_block > 0) {
            double lam = static_cast<double>(lmax_retained) * (lmax_retained + 1);
            tail += excluded_in_block * std::exp(-lam * t / 2.0) * (2.0 * lmax_retained + 1.0) / (4.0 * kPi);
        }
        const double B = lmax_retained;
        const double r = std::exp(-(2.0 * B + 3.0) * t / 2.0);
        if (r < 1.0) {
            double lead = std::exp(-(B + 1.0) * (B + 2.0) * t / 2.0);
            tail += (2.0 * B + 3.0) * (2.0 * B + 3.0) / (4.0 * kPi) * lead * (1.0 + r) /
                    std::pow(1.0 - r, 3);
        } else {
            tail = std::numeric_limits<double>::infinity();
        }
        return tail;
    }
    // circle/torus: sum over excluded lattice points of (2/m0) e^{-lambda t/2}
    // <= (2/m0) e^{-lambda_next t/4} * prod_i theta(L_i, t/4).
    double prod = 1.0;
    for (double L : m.lengths()) prod *= theta_sum(L, t / 4.0);
    return (2.0 / m0) * std::exp(-basis.lambda_next() * t / 4.0) * prod;
}

}  // namespace

HeatKernelResult heat_kernel(const ManifoldSpec& m, double t, const Point& x,
                             const Point& y, SpectralTruncation trunc) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: t must be positive");
    if (t < kMinHeatTime)
        throw std::invalid_argument(
            "heat_kernel: t below 1e-4; the truncated series loses positivity there "
            "(raise the truncation N to evaluate smaller times)");
    EigenBasis basis(m, trunc);
    std::vector<double> fx(static_cast<size_t>(basis.size()));
    std::vector<double> fy(static_cast<size_t>(basis.size()));
    basis.eval_all(x, fx);
    basis.eval_all(y, fy);
    double v = 0.0;
    for (int n = basis.size() - 1; n >= 0; --n)
        v += std::exp(-basis.lambda(n) * t / 2.0) *
             (fx[static_cast<size_t>(n)] * fy[static_cast<size_t>(n)]);
    return {v, heat_tail_bound(basis, t)};
}

MixingProfile mixing_decay_profile(const ManifoldSpec& m, SpectralTruncation trunc,
                                   const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("mixing_decay_profile: empty grid");
    for (double t : t_grid)
        if (!(t > 0.0)) throw std::invalid_argument("mixing_decay_profile: t values must be positive");

    EigenBasis basis(m, trunc);
    QuadratureRule lattice = quadrature_rule(m, m.kind() == ManifoldKind::Circle ? 256 : 32);
    std::vector<std::vector<double>> vals(lattice.points.size());
    std::vector<double> buf(static_cast<size_t>(basis.size()));
    for (size_t p = 0; p < lattice.points.size(); ++p) {
        basis.eval_all(lattice.points[p], buf);
        vals[p].assign(buf.begin(), buf.end());
    }

    MixingProfile profile;
    profile.t = t_grid;
    profile.sup_deviation.resize(t_grid.size(), 0.0);
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
        double sup = 0.0;
        for (const auto& fv : vals) {
            double diag = 0.0;
            for (int n = basis.size() - 1; n >= 1; --n)
                diag += std::exp(-basis.lambda(n) * t_grid[ti] / 2.0) * fv[static_cast<size_t>(n)] * fv[static_cast<size_t>(n)];
            sup = std::max(sup, std::abs(diag));
        }
        profile.sup_deviation[ti] = sup;
    }
    profile.reference_rate = basis.size() > 1 ? -basis.lambda(1) / 2.0 : 0.0;

    // least-squares slope of log(sup) against t, over the strictly positive rows
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (profile.sup_deviation[i] <= 0.0) continue;
        double lx = t_grid[i], ly = std::log(profile.sup_deviation[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++cnt;
    }
    profile.fitted_log_slope = (cnt >= 2) ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    return profile;
}

QuadratureRule quadrature_rule(const ManifoldSpec& m, int resolution) {
    QuadratureRule rule;
    if (m.kind() == ManifoldKind::Sphere2) {
        const int ntheta = resolution > 0 ? resolution : 64;
        const int nphi = 2 * ntheta;
        using gauss = boost::math::quadrature::gauss<double, 64>;
        std::vector<double> us, ws;
        if (resolution == 0 || resolution == 64) {
            // full node set from the symmetric half tables
            const auto& ab = gauss::abscissa();
            const auto& w = gauss::weights();
            for (size_t i = ab.size(); i-- > 0;) {
                us.push_back(-ab[i]);
                ws.push_back(w[i]);
            }
            for (size_t i = 0; i < ab.size(); ++i) {
                if (ab[i] == 0.0) continue;
                us.push_back(ab[i]);
                ws.push_back(w[i]);
            }
        } else {
            // midpoint rule in u as a fallback for nonstandard resolutions
            for (int i = 0; i < ntheta; ++i) {
                us.push_back(-1.0 + (2.0 * i + 1.0) / ntheta);
                ws.push_back(2.0 / ntheta);
            }
        }
        const double wphi = 2.0 * kPi / nphi;
        for (size_t iu = 0; iu < us.size(); ++iu) {
            const double u = us[iu];
            const double st = std::sqrt(std::max(0.0, 1.0 - u * u));
            for (int j = 0; j < nphi; ++j) {
                const double phi = (2.0 * kPi * j) / nphi;
                rule.points.push_back(Point{{st * std::cos(phi), st * std::sin(phi), u}});
                rule.weights.push_back(ws[iu] * wphi);
            }
        }
        return rule;
    }
    const auto& lengths = m.lengths();
    const int d = static_cast<int>(lengths.size());
    const int per_axis = resolution > 0 ? resolution : (m.kind() == ManifoldKind::Circle ? 4096 : 128);
    std::vector<int> idx(static_cast<size_t>(d), 0);
    double w = 1.0;
    for (double L : lengths) w *= L / per_axis;
    while (true) {
        std::vector<double> coords(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i)
            coords[static_cast<size_t>(i)] = lengths[static_cast<size_t>(i)] * idx[static_cast<size_t>(i)] / per_axis;
        rule.points.push_back(Point{std::move(coords)});
        rule.weights.push_back(w);
        int axis = d - 1;
        while (axis >= 0) {
            if (++idx[static_cast<size_t>(axis)] < per_axis) break;
            idx[static_cast<size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) break;
    }
    return rule;
}

}  // namespace lil
