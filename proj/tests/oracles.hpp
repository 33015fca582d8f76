#pragma once

// Reference values computed independently of the library's discretization.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

inline double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

/// |S^{N-1}| int_lo^hi g(r) r^{N-1} dr by adaptive Gauss-Kronrod.
template <class G>
double radial_integral(int n, G&& g, double lo, double hi) {
    auto integrand = [&](double r) { return g(r) * std::pow(r, n - 1); };
    return sphere_area(n) *
           boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 25, 1e-14);
}

/// Best constant in ||grad u||_2^2 >= S ||u||_{2*}^2.
inline double sobolev_closed_form(int n) {
    return std::numbers::pi * n * (n - 2) * std::pow(std::tgamma(0.5 * n) / std::tgamma(n), 2.0 / n);
}

/// Smooth radial bump with random height, width and a second mode.
struct RandomProfile {
    double h1, w1, h2, w2;
    explicit RandomProfile(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        h1 = 0.5 + U(rng);
        w1 = 0.6 + 1.5 * U(rng);
        h2 = 0.6 * (U(rng) - 0.5);
        w2 = 0.4 + 1.0 * U(rng);
    }
    double operator()(double r) const {
        return h1 * std::exp(-r * r / (w1 * w1)) + h2 * r * r * std::exp(-r * r / (w2 * w2));
    }
    double derivative(double r) const {
        return -2.0 * r * h1 / (w1 * w1) * std::exp(-r * r / (w1 * w1)) +
               h2 * (2.0 * r - 2.0 * r * r * r / (w2 * w2)) * std::exp(-r * r / (w2 * w2));
    }
};

}  // namespace oracle
