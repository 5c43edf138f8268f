#pragma once

// Fisher information of the photon-counting measurement, quantum Fisher
// information benchmarks and the Cramer-Rao bound.

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hompol/closedform.hpp"
#include "hompol/error.hpp"
#include "hompol/optics.hpp"
#include "hompol/parallel.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol {

/// Probabilities below this use the zero limit (P')^2/P -> 2 P''.
inline constexpr double kZeroProbability = 1e-12;

enum class FisherMethod { analytic_derivative, finite_difference };

inline const char *to_string(FisherMethod m) {
    return m == FisherMethod::analytic_derivative ? "analytic-derivative"
                                                  : "finite-difference";
}

struct FisherPoint {
    double phi = 0.0;
    double fisher = 0.0;
    FisherMethod method = FisherMethod::analytic_derivative;
    int limit_terms_used = 0;
};

namespace detail {

/// sum_m (P_m')^2 / P_m, with vanishing P_m handled by the limit of a
/// quadratic zero P ~ a x^2: (P')^2/P -> 4a = 2 P''. For a quartic zero both
/// sides are 0.
template <std::size_t N>
FisherPoint fisher_sum(double phi, const std::array<double, N> &p,
                       const std::array<double, N> &dp,
                       const std::array<double, N> &d2p, FisherMethod method) {
    FisherPoint out{phi, 0.0, method, 0};
    for (std::size_t m = 0; m < N; ++m) {
        if (p[m] < kZeroProbability) {
            out.fisher += std::max(0.0, 2.0 * d2p[m]);
            ++out.limit_terms_used;
        } else {
            out.fisher += dp[m] * dp[m] / p[m];
        }
    }
    return out;
}

} // namespace detail

/// Four-photon Fisher information at theta = phi/4 with analytic
/// derivatives.
inline FisherPoint fisher(double theta, const OverlapFactors &f) {
    return detail::fisher_sum(4.0 * theta, p4_values(theta, f), p4_derivative(theta, f),
                              p4_second_derivative(theta, f),
                              FisherMethod::analytic_derivative);
}

inline FisherPoint fisher(double theta, const PacketPair &pair) {
    return fisher(theta, OverlapFactors::from_pair(pair));
}

inline FisherPoint fisher(const InterferometerSetting &setting) {
    return fisher(setting.theta(), setting.pair());
}

/// Same sum with central differences of step h in phi.
inline FisherPoint fisher_finite_difference(double theta, const OverlapFactors &f,
                                            double h = 1e-5) {
    const double dtheta = h / 4.0;
    const auto p = p4_values(theta, f);
    const auto plus = p4_values(theta + dtheta, f);
    const auto minus = p4_values(theta - dtheta, f);
    std::array<double, 5> dp{};
    std::array<double, 5> d2p{};
    for (std::size_t m = 0; m < 5; ++m) {
        dp[m] = (plus[m] - minus[m]) / (2.0 * h);
        d2p[m] = (plus[m] - 2.0 * p[m] + minus[m]) / (h * h);
    }
    return detail::fisher_sum(4.0 * theta, p, dp, d2p, FisherMethod::finite_difference);
}

/// Fisher information over the two-photon outcomes {2:0, 0:2, 1:1}.
inline FisherPoint fisher_two_photon(double theta, const OverlapFactors &f) {
    const auto p = p2_closed(theta, f).values();
    return detail::fisher_sum(4.0 * theta, p, p2_derivative(theta, f),
                              p2_second_derivative(theta, f),
                              FisherMethod::analytic_derivative);
}

inline FisherPoint fisher_two_photon(double theta, const PacketPair &pair) {
    return fisher_two_photon(theta, OverlapFactors::from_pair(pair));
}

namespace detail {

inline void require_even_photons(int n) {
    if (n < 2 || n % 2 != 0) {
        throw InvalidPhotonNumber("expected an even photon number >= 2, got " +
                                  std::to_string(n));
    }
}

} // namespace detail

/// QFI of the N-photon Holland-Burnett state, N (N/2 + 1).
inline double qfi_hb(int n_photons) {
    detail::require_even_photons(n_photons);
    const double n = n_photons;
    return n * (n / 2.0 + 1.0);
}

/// QFI of N/2 + N/2 photons with indistinguishability I: N (N I / 2 + 1).
inline double qfi_partial(int n_photons, double indist) {
    detail::require_even_photons(n_photons);
    if (!(indist >= 0.0 && indist <= 1.0)) {
        throw OutOfRangeIndistinguishability("indistinguishability must lie in "
                                             "[0, 1], got " +
                                             std::to_string(indist));
    }
    const double n = n_photons;
    return n * (n * indist / 2.0 + 1.0);
}

/// Cramer-Rao variance bound; `unbounded` marks zero information.
struct VarianceBound {
    double variance = std::numeric_limits<double>::infinity();
    bool unbounded = true;
};

inline VarianceBound qcrb(double fisher_information, long long n_repetitions) {
    if (n_repetitions <= 0) {
        throw std::invalid_argument("number of repetitions must be positive");
    }
    if (!(fisher_information >= 0.0)) {
        throw std::invalid_argument("Fisher information must be non-negative");
    }
    if (fisher_information == 0.0) {
        return {};
    }
    return {1.0 / (static_cast<double>(n_repetitions) * fisher_information), false};
}

/// F on a (delta_z, phi) grid; row-major with one row per delta_z.
struct FisherScan {
    std::vector<double> phi;
    std::vector<double> delta_z_um;
    LabParameters lab;
    std::vector<FisherPoint> points;

    [[nodiscard]] const FisherPoint &at(std::size_t iz, std::size_t iphi) const {
        return points[iz * phi.size() + iphi];
    }
};

inline void require_increasing(std::span<const double> grid, const char *name) {
    if (grid.empty()) {
        throw std::invalid_argument(std::string(name) + " grid is empty");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(std::string(name) +
                                        " grid must be strictly increasing");
        }
    }
}

/// Evaluates fisher() on the Cartesian grid. `lab.delta_z_um` is ignored;
/// each row takes its path difference from `delta_z_grid`.
inline FisherScan fisher_scan(std::span<const double> phi_grid,
                              std::span<const double> delta_z_grid,
                              const LabParameters &lab, unsigned threads = 1) {
    require_increasing(phi_grid, "phi");
    require_increasing(delta_z_grid, "delta_z");
    FisherScan scan{{phi_grid.begin(), phi_grid.end()},
                    {delta_z_grid.begin(), delta_z_grid.end()},
                    lab,
                    std::vector<FisherPoint>(phi_grid.size() * delta_z_grid.size())};
    std::vector<OverlapFactors> rows;
    rows.reserve(delta_z_grid.size());
    for (const double dz : delta_z_grid) {
        rows.push_back(OverlapFactors::from_pair(
            packets_from_lab(dz, lab.lambda0_nm, lab.delta_lambda_nm, lab.l_c_um)));
    }
    const std::size_t n_phi = phi_grid.size();
    parallel_for(scan.points.size(), threads, [&](std::size_t k) {
        const std::size_t iz = k / n_phi;
        const std::size_t ip = k % n_phi;
        scan.points[k] = fisher(phi_grid[ip] / 4.0, rows[iz]);
    });
    return scan;
}

} // namespace hompol
