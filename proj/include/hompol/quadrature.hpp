#pragma once

#include <gsl/gsl_integration.h>

#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include "hompol/error.hpp"

namespace hompol::quadrature {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
class GaussLegendreRule {
  public:
    explicit GaussLegendreRule(std::size_t n_points) {
        std::unique_ptr<gsl_integration_glfixed_table,
                        decltype(&gsl_integration_glfixed_table_free)>
            table(gsl_integration_glfixed_table_alloc(n_points),
                  &gsl_integration_glfixed_table_free);
        if (!table) {
            throw Error("failed to build Gauss-Legendre table");
        }
        nodes_.resize(n_points);
        weights_.resize(n_points);
        for (std::size_t i = 0; i < n_points; ++i) {
            gsl_integration_glfixed_point(-1.0, 1.0, i, &nodes_[i],
                                          &weights_[i], table.get());
        }
    }

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

/// Shared 64-point rule; built once, read-only afterwards.
inline const GaussLegendreRule &gauss_legendre_64() {
    static const GaussLegendreRule rule(64);
    return rule;
}

/// Composite Gauss-Legendre sum of f over [lo, hi] split into equal panels.
template <class Fn>
auto composite_gauss_legendre(Fn &&f, double lo, double hi, std::size_t panels,
                              const GaussLegendreRule &rule = gauss_legendre_64())
    -> decltype(f(lo)) {
    using Value = decltype(f(lo));
    Value total{};
    const double width = (hi - lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + width * static_cast<double>(p);
        const double half = 0.5 * width;
        const double mid = a + half;
        Value panel{};
        for (std::size_t i = 0; i < rule.size(); ++i) {
            panel += rule.weight(i) * f(mid + half * rule.node(i));
        }
        total += half * panel;
    }
    return total;
}

struct Estimate {
    std::complex<double> value;
    double error;
};

/// Integrates f on [lo, hi] with `panels` panels and again with twice as
/// many; the difference is the error estimate. Throws when it exceeds `tol`.
template <class Fn>
Estimate integrate_checked(Fn &&f, double lo, double hi, std::size_t panels,
                           double tol) {
    const std::complex<double> coarse =
        composite_gauss_legendre(f, lo, hi, panels);
    const std::complex<double> fine =
        composite_gauss_legendre(f, lo, hi, 2 * panels);
    const double err = std::abs(fine - coarse);
    if (!(err <= tol)) {
        throw QuadratureNotConverged("quadrature error estimate " +
                                     std::to_string(err) +
                                     " exceeds tolerance " +
                                     std::to_string(tol));
    }
    return {fine, err};
}

} // namespace hompol::quadrature
