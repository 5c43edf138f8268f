#pragma once

// Closed-form outcome probabilities of the polarization HOM interferometer
// fed with two photon pairs, and their exact phase derivatives.
//
// All four-photon probabilities are polynomials in w = sin^2(2t) cos^2(2t)
// (t the HWP angle) and in the overlap factors E1 = |<xi1|xi2>|^2, E2 = E1^2:
//
//   P(4:0) = w^2 (1 + 4 E1 + E2)
//   P(3:1) = 2 w [ cos^2(phi) (1 + 2 E1) + 2 w (1 - E2) ]
//   P(2:2) = (1 - 6 w)^2 + 8 w (1 - 3 w)(1 - E1) - 6 w^2 (1 - E2)
//
// which are the textbook expressions regrouped so that every exact zero
// (P(3:1) at phi = pi/2 and E1 = 1, P(2:2) at sin^2 phi = 2/3) is a product
// of factors and not a cancellation.

#include <array>
#include <cmath>

#include "hompol/outcome.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol {

/// E1 = exp(-4 dtau^2/tc^2 - domega^2 tc^2) and E2 = E1^2, together with
/// their complements computed without cancellation.
struct OverlapFactors {
    double e1 = 1.0;
    double one_minus_e1 = 0.0;
    double e2 = 1.0;
    double one_minus_e2 = 0.0;

    static OverlapFactors from_exponent(double exponent) {
        return {std::exp(exponent), -std::expm1(exponent), std::exp(2.0 * exponent),
                -std::expm1(2.0 * exponent)};
    }

    static OverlapFactors from_packets(double delta_tau, double delta_omega,
                                       double tc) {
        return from_exponent(-4.0 * delta_tau * delta_tau / (tc * tc) -
                             delta_omega * delta_omega * tc * tc);
    }

    static OverlapFactors from_pair(const PacketPair &pair) {
        return from_packets(pair.delta_tau(), pair.delta_omega(), pair.tc());
    }

    /// Direct parameterization by the indistinguishability I in [0, 1].
    static OverlapFactors from_indistinguishability(double indist) {
        return {indist, 1.0 - indist, indist * indist,
                (1.0 - indist) * (1.0 + indist)};
    }
};

namespace detail {

/// w, dw/dphi and d2w/dphi2 at phi = 4 theta.
struct PhaseWeight {
    double w;
    double dw;
    double d2w;
    double cos_phi;
};

inline PhaseWeight phase_weight(double theta) {
    const double s = std::sin(2.0 * theta);
    const double c = std::cos(2.0 * theta);
    const double phi = 4.0 * theta;
    return {s * s * c * c, 0.25 * std::sin(2.0 * phi), 0.5 * std::cos(2.0 * phi),
            std::cos(phi)};
}

/// Polynomials A_m(w) and their first two w-derivatives, pattern order
/// 4:0, 3:1, 2:2.
struct PatternPolynomials {
    std::array<double, 3> d1;
    std::array<double, 3> d2;
};

inline PatternPolynomials pattern_polynomials(double w, const OverlapFactors &f) {
    const double k40 = 1.0 + 4.0 * f.e1 + f.e2;
    PatternPolynomials out{};
    out.d1[0] = 2.0 * w * k40;
    out.d2[0] = 2.0 * k40;
    out.d1[1] = 2.0 - 8.0 * w + 4.0 * f.e1 - 32.0 * w * f.e1 - 8.0 * w * f.e2;
    out.d2[1] = -8.0 - 32.0 * f.e1 - 8.0 * f.e2;
    out.d1[2] = -4.0 + 12.0 * w + (48.0 * w - 8.0) * f.e1 + 12.0 * w * f.e2;
    out.d2[2] = 12.0 + 48.0 * f.e1 + 12.0 * f.e2;
    return out;
}

inline std::array<double, 5> expand_to_five(const std::array<double, 3> &v) {
    return {v[0], v[0], v[1], v[1], v[2]};
}

} // namespace detail

/// Four-photon probabilities in four_photon_patterns() order.
inline std::array<double, 5> p4_values(double theta, const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const double w = pw.w;
    const double p40 = w * w * (1.0 + 4.0 * f.e1 + f.e2);
    const double p31 = 2.0 * w *
                       (pw.cos_phi * pw.cos_phi * (1.0 + 2.0 * f.e1) +
                        2.0 * w * f.one_minus_e2);
    const double b = 1.0 - 6.0 * w;
    const double p22 = b * b + 8.0 * w * (1.0 - 3.0 * w) * f.one_minus_e1 -
                       6.0 * w * w * f.one_minus_e2;
    return {p40, p40, p31, p31, p22};
}

/// dP_m/dphi with phi = 4 theta.
inline std::array<double, 5> p4_derivative(double theta, const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const auto poly = detail::pattern_polynomials(pw.w, f);
    std::array<double, 3> d{};
    for (std::size_t i = 0; i < 3; ++i) {
        d[i] = poly.d1[i] * pw.dw;
    }
    return detail::expand_to_five(d);
}

/// d^2 P_m/dphi^2.
inline std::array<double, 5> p4_second_derivative(double theta,
                                                  const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const auto poly = detail::pattern_polynomials(pw.w, f);
    std::array<double, 3> d{};
    for (std::size_t i = 0; i < 3; ++i) {
        d[i] = poly.d2[i] * pw.dw * pw.dw + poly.d1[i] * pw.d2w;
    }
    return detail::expand_to_five(d);
}

inline OutcomeDistribution p4_closed(const InterferometerSetting &setting) {
    const auto p = p4_values(setting.theta(), OverlapFactors::from_pair(setting.pair()));
    return {p[0], p[1], p[2], p[3], p[4], setting};
}

/// Builds a reference pair (centered at t = 0, omega = 0) carrying the given
/// half differences; the probabilities only depend on those.
inline PacketPair reference_pair(double delta_tau, double delta_omega, double tc) {
    return {GaussianPacket(-delta_omega, -delta_tau, tc),
            GaussianPacket(delta_omega, delta_tau, tc)};
}

inline OutcomeDistribution p4_closed(double theta, double delta_tau,
                                     double delta_omega, double tc) {
    if (!(tc > 0.0)) {
        throw std::invalid_argument("coherence time must be positive");
    }
    return p4_closed(
        InterferometerSetting(theta, reference_pair(delta_tau, delta_omega, tc)));
}

inline std::array<double, 5> p4_derivative(double theta, double delta_tau,
                                           double delta_omega, double tc) {
    if (!(tc > 0.0)) {
        throw std::invalid_argument("coherence time must be positive");
    }
    return p4_derivative(theta,
                         OverlapFactors::from_packets(delta_tau, delta_omega, tc));
}

// Two-photon input |1_xi1>_s1 |1_xi2>_s2:
//   P(2:0) = P(0:2) = w (1 + I),  P(1:1) = cos^2(phi) + 2 w (1 - I).

inline TwoPhotonDistribution p2_closed(double theta, const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const double bunched = pw.w * (1.0 + f.e1);
    return {bunched, bunched,
            pw.cos_phi * pw.cos_phi + 2.0 * pw.w * f.one_minus_e1};
}

inline TwoPhotonDistribution p2_closed(double theta, const PacketPair &pair) {
    return p2_closed(theta, OverlapFactors::from_pair(pair));
}

inline TwoPhotonDistribution p2_closed(double theta, double indist) {
    return p2_closed(theta, OverlapFactors::from_indistinguishability(indist));
}

/// dP/dphi for (2:0, 0:2, 1:1).
inline std::array<double, 3> p2_derivative(double theta, const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const double d = pw.dw * (1.0 + f.e1);
    return {d, d, -2.0 * d};
}

inline std::array<double, 3> p2_second_derivative(double theta,
                                                  const OverlapFactors &f) {
    const auto pw = detail::phase_weight(theta);
    const double d = pw.d2w * (1.0 + f.e1);
    return {d, d, -2.0 * d};
}

} // namespace hompol
