#pragma once

// Radially symmetric functions on R^N sampled on a 1D grid r_0 = 0 < ... < r_K.
//
// The discretization is vertex-centred finite volume: node i owns the shell
// between the neighbouring cell midpoints, and each cell carries a
// "conductance" |S^{N-1}| rho^{N-1} / h evaluated at its midpoint rho. The
// discrete Dirichlet energy is then sum_c A_c (u_{c+1} - u_c)^2, and its
// weighted gradient is the usual conservative radial Laplacian, which at the
// origin reduces to 2N (u_1 - u_0) / r_1^2.

#include "kirchhoff/errors.hpp"

#include <cmath>

// Boost 1.74 pchip calls isnan unqualified; make std::isnan visible to it.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace kirchhoff {

enum class GridScheme { uniform, graded };

inline std::string to_string(GridScheme s) { return s == GridScheme::uniform ? "uniform" : "graded"; }

inline GridScheme grid_scheme_from_string(const std::string& s) {
    if (s == "uniform") return GridScheme::uniform;
    if (s == "graded") return GridScheme::graded;
    throw SpecError("unknown grid scheme '" + s + "'");
}

/// Surface measure of the unit sphere S^{N-1} in R^N.
inline double sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

inline double ball_volume(int dim, double radius) { return sphere_area(dim) * std::pow(radius, dim) / dim; }

class RadialGrid {
public:
    /// Default stretch for graded grids: h_last / h_first is about cosh(stretch).
    static constexpr double default_stretch = 4.0;

    static RadialGrid make(int dim, double r_max, std::size_t cells, GridScheme scheme,
                           double stretch = default_stretch) {
        if (dim < 1 || dim > 10) throw SpecError("grid dimension must be in 1..10");
        if (!(r_max > 0.0) || !std::isfinite(r_max)) throw SpecError("grid radius must be positive");
        if (cells < 16) throw SpecError("grid needs at least 16 cells");
        std::vector<double> r(cells + 1);
        for (std::size_t i = 0; i <= cells; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(cells);
            r[i] = scheme == GridScheme::uniform ? r_max * x
                                                 : r_max * std::sinh(stretch * x) / std::sinh(stretch);
        }
        r.back() = r_max;
        return RadialGrid(dim, std::move(r), scheme);
    }

    /// Arbitrary strictly increasing node set starting at 0.
    static RadialGrid from_nodes(int dim, std::vector<double> nodes, GridScheme scheme = GridScheme::graded) {
        if (dim < 1 || dim > 10) throw SpecError("grid dimension must be in 1..10");
        if (nodes.size() < 17) throw SpecError("grid needs at least 16 cells");
        if (nodes.front() != 0.0) throw SpecError("grid must start at r = 0");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1])) throw SpecError("grid nodes must be strictly increasing");
        return RadialGrid(dim, std::move(nodes), scheme);
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t cells() const noexcept { return nodes_.size() - 1; }
    double r_max() const noexcept { return nodes_.back(); }
    GridScheme scheme() const noexcept { return scheme_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<const double> conductance() const noexcept { return conductance_; }
    double node(std::size_t i) const { return nodes_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }

    /// Sum of the weights, i.e. the discrete ball volume.
    double volume() const {
        double v = 0.0;
        for (double w : weights_) v += w;
        return v;
    }

    nlohmann::json metadata() const {
        return {{"dim", dim_}, {"r_max", r_max()}, {"cells", cells()}, {"scheme", to_string(scheme_)}};
    }

private:
    RadialGrid(int dim, std::vector<double> nodes, GridScheme scheme)
        : dim_(dim), nodes_(std::move(nodes)), scheme_(scheme) {
        const std::size_t n = nodes_.size();
        const double area = sphere_area(dim_);
        weights_.assign(n, 0.0);
        conductance_.assign(n - 1, 0.0);
        auto shell = [&](double lo, double hi) {
            return area * (std::pow(hi, dim_) - std::pow(lo, dim_)) / dim_;
        };
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const double lo = nodes_[c], hi = nodes_[c + 1];
            const double mid = 0.5 * (lo + hi);
            weights_[c] += shell(lo, mid);
            weights_[c + 1] += shell(mid, hi);
            conductance_[c] = area * std::pow(mid, dim_ - 1) / (hi - lo);
        }
    }

    int dim_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> conductance_;
    GridScheme scheme_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int dim, double r_max, std::size_t cells, GridScheme scheme,
                         double stretch = RadialGrid::default_stretch) {
    return std::make_shared<const RadialGrid>(RadialGrid::make(dim, r_max, cells, scheme, stretch));
}

/// Samples of a radial function; the last node is the Dirichlet tail.
class RadialFunction {
public:
    RadialFunction() = default;
    explicit RadialFunction(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}
    RadialFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->size()) throw SpecError("radial function size does not match its grid");
        for (double v : values_)
            if (!std::isfinite(v)) throw SpecError("radial function has a non-finite sample");
    }

    template <class Fn>
    static RadialFunction sample(GridPtr grid, Fn&& fn) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i));
        return RadialFunction(std::move(grid), std::move(v));
    }

    const RadialGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    RadialFunction& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    friend RadialFunction operator*(double s, RadialFunction u) { return u *= s; }

    /// this += alpha * other (same grid).
    RadialFunction& axpy(double alpha, const RadialFunction& other) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += alpha * other.values_[i];
        return *this;
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

inline double integrate(const RadialGrid& grid, std::span<const double> values) {
    const auto w = grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * values[i];
    return s;
}

/// Weighted L2 inner product.
inline double inner(const RadialFunction& u, const RadialFunction& v) {
    const auto w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * u[i] * v[i];
    return s;
}

inline double mass(const RadialFunction& u) { return inner(u, u); }

inline double grad_norm_sq(const RadialFunction& u) {
    const auto a = u.grid().conductance();
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = u[c + 1] - u[c];
        s += a[c] * d * d;
    }
    return s;
}

inline double lp_norm(const RadialFunction& u, double p) {
    if (!(p >= 1.0)) throw SpecError("lp_norm requires p >= 1");
    const auto w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), p);
    return std::pow(s, 1.0 / p);
}

/// sum w |u|^p, i.e. ||u||_p^p.
inline double lp_power(const RadialFunction& u, double p) {
    const auto w = u.grid().weights();
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(u[i]), p);
    return s;
}

/// Discrete -Laplacian, zero at the Dirichlet node r_K.
inline RadialFunction neg_laplacian(const RadialFunction& u) {
    const auto& g = u.grid();
    const auto a = g.conductance();
    const auto w = g.weights();
    RadialFunction out(u.grid_ptr());
    const std::size_t last = g.size() - 1;
    for (std::size_t i = 0; i < last; ++i) {
        double flux = a[i] * (u[i] - u[i + 1]);
        if (i > 0) flux += a[i - 1] * (u[i] - u[i - 1]);
        out[i] = flux / w[i];
    }
    return out;
}

/// Fraction of the mass carried by nodes with r >= frac * r_max.
inline double tail_mass_fraction(const RadialFunction& u, double frac = 0.9) {
    const auto& g = u.grid();
    const double total = mass(u);
    if (total <= 0.0) return 0.0;
    double tail = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.node(i) >= frac * g.r_max()) tail += g.weight(i) * u[i] * u[i];
    return tail / total;
}

/// Monotone cubic interpolant of u with u'(0) = 0 and zero extension beyond r_max.
class RadialInterpolant {
public:
    explicit RadialInterpolant(const RadialFunction& u)
        : r_max_(u.grid().r_max()),
          spline_(std::vector<double>(u.grid().nodes().begin(), u.grid().nodes().end()),
                  std::vector<double>(u.values().begin(), u.values().end()), 0.0) {}

    double operator()(double r) const {
        if (r > r_max_) return 0.0;
        return spline_(r);
    }

private:
    double r_max_;
    boost::math::interpolators::pchip<std::vector<double>> spline_;
};

/// Relative mass that T(u, s) would push past r_max.
inline double fiber_lost_fraction(const RadialFunction& u, double s) {
    if (s >= 0.0) return 0.0;
    const auto& g = u.grid();
    const double cut = std::exp(s) * g.r_max();
    const double total = mass(u);
    if (total <= 0.0) return 0.0;
    double lost = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.node(i) > cut) lost += g.weight(i) * u[i] * u[i];
    return lost / total;
}

/// Mass-preserving dilation T(u,s)(r) = e^{Ns/2} u(e^s r), resampled on the same grid.
inline RadialFunction fiber_scale(const RadialFunction& u, double s, double max_loss = 1e-6) {
    if (s == 0.0) return u;
    const double lost = fiber_lost_fraction(u, s);
    if (lost > max_loss) {
        std::ostringstream msg;
        msg << "fiber_scale(s=" << s << ") would push " << lost << " of the mass beyond r_max";
        throw TruncationLoss(msg.str(), lost);
    }
    const auto& g = u.grid();
    const RadialInterpolant interp(u);
    const double amp = std::exp(0.5 * g.dim() * s);
    const double stretch = std::exp(s);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = amp * interp(stretch * g.node(i));
    v.back() = 0.0;
    return RadialFunction(u.grid_ptr(), std::move(v));
}

inline RadialFunction normalize_mass(const RadialFunction& u, double c) {
    if (!(c > 0.0)) throw SpecError("target mass must be positive");
    const double m = mass(u);
    if (!(m > 0.0)) throw SpecError("cannot normalize the zero function");
    return (c / std::sqrt(m)) * u;
}

inline void write_csv(const RadialFunction& u, std::ostream& os) {
    os << "r,value\n";
    os.precision(17);
    for (std::size_t i = 0; i < u.size(); ++i) os << u.grid().node(i) << ',' << u[i] << '\n';
}

inline void write_csv(const RadialFunction& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_csv(u, os);
    if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace kirchhoff
