#pragma once

// Gaussian single-photon wave packets and their mode overlaps.
//
// Units used throughout the library: time in fs, angular frequency in
// rad/fs, lengths in um (path differences, coherence lengths) and
// wavelengths in nm. Every conversion between them lives in this header.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "hompol/error.hpp"
#include "hompol/quadrature.hpp"

namespace hompol {

using Complex = std::complex<double>;

namespace units {

/// Speed of light in um/fs (exact SI value).
inline constexpr double speed_of_light_um_per_fs = 0.299792458;

inline double time_from_path_fs(double path_um) {
    return path_um / speed_of_light_um_per_fs;
}

inline double path_from_time_um(double time_fs) {
    return time_fs * speed_of_light_um_per_fs;
}

/// omega = 2 pi c / lambda, exact (no small-offset expansion).
inline double angular_frequency_rad_per_fs(double wavelength_nm) {
    return 2.0 * std::numbers::pi * speed_of_light_um_per_fs /
           (wavelength_nm * 1e-3);
}

} // namespace units

/// Normalized Gaussian temporal mode
///   xi(t) = (2/(pi tc^2))^(1/4) exp(-(t-tau)^2/tc^2 - i omega0 (t-tau)).
class GaussianPacket {
  public:
    GaussianPacket(double omega0, double tau, double tc)
        : omega0_(omega0), tau_(tau), tc_(tc) {
        if (!(tc > 0.0) || !std::isfinite(tc)) {
            throw std::invalid_argument("coherence time must be positive, got " +
                                        std::to_string(tc));
        }
        if (!std::isfinite(omega0) || !std::isfinite(tau)) {
            throw std::invalid_argument("packet parameters must be finite");
        }
    }

    [[nodiscard]] double omega0() const { return omega0_; }
    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] double tc() const { return tc_; }

    /// Same packet moved by dt in time and domega in frequency.
    [[nodiscard]] GaussianPacket shifted(double dt, double domega) const {
        return {omega0_ + domega, tau_ + dt, tc_};
    }

  private:
    double omega0_;
    double tau_;
    double tc_;
};

/// Two packets with a common coherence time.
class PacketPair {
  public:
    PacketPair(GaussianPacket first, GaussianPacket second)
        : first_(first), second_(second) {
        const double scale = std::max(first.tc(), second.tc());
        if (std::abs(first.tc() - second.tc()) > 1e-12 * scale) {
            throw MismatchedCoherenceTime(
                "packet pair requires a common coherence time (" +
                std::to_string(first.tc()) + " vs " +
                std::to_string(second.tc()) + " fs)");
        }
    }

    [[nodiscard]] const GaussianPacket &first() const { return first_; }
    [[nodiscard]] const GaussianPacket &second() const { return second_; }
    [[nodiscard]] double tc() const { return first_.tc(); }

    /// Half the arrival-time difference, (tau2 - tau1)/2.
    [[nodiscard]] double delta_tau() const {
        return 0.5 * (second_.tau() - first_.tau());
    }
    /// Half the central-frequency difference, (omega2 - omega1)/2.
    [[nodiscard]] double delta_omega() const {
        return 0.5 * (second_.omega0() - first_.omega0());
    }

  private:
    GaussianPacket first_;
    GaussianPacket second_;
};

inline Complex amplitude(const GaussianPacket &p, double t) {
    const double tc = p.tc();
    const double norm = std::pow(2.0 / (std::numbers::pi * tc * tc), 0.25);
    const double dt = t - p.tau();
    return norm * std::exp(Complex(-dt * dt / (tc * tc), -p.omega0() * dt));
}

/// Spectral amplitude with bandwidth 1/tc. The linear phase is exp(i omega
/// tau), which makes the transform (1/sqrt(2 pi)) int e^{-i omega t} Phi
/// reproduce amplitude() including its global phase.
inline Complex spectral_amplitude(const GaussianPacket &p, double omega) {
    const double bandwidth = 1.0 / p.tc();
    const double norm = std::pow(
        1.0 / (2.0 * std::numbers::pi * bandwidth * bandwidth), 0.25);
    const double detuning = p.omega0() - omega;
    return norm * std::exp(Complex(-detuning * detuning /
                                       (4.0 * bandwidth * bandwidth),
                                   omega * p.tau()));
}

/// <xi1|xi2> = int conj(xi1(t)) xi2(t) dt by composite 64-point
/// Gauss-Legendre quadrature over [min tau - 8 tc, max tau + 8 tc]. The rule
/// is re-run with halved panels; the difference must stay below `tol`.
inline Complex overlap_numeric(const GaussianPacket &p1, const GaussianPacket &p2,
                               double tol = 1e-10) {
    const double tc = std::max(p1.tc(), p2.tc());
    const double lo = std::min(p1.tau(), p2.tau()) - 8.0 * tc;
    const double hi = std::max(p1.tau(), p2.tau()) + 8.0 * tc;
    const double span = hi - lo;
    // At most 2 tc and about four beat periods per panel.
    const double beat = std::abs(p1.omega0() - p2.omega0());
    const double by_width = std::ceil(span / (2.0 * std::min(p1.tc(), p2.tc())));
    const double by_beat = std::ceil(span * beat / (8.0 * std::numbers::pi));
    const auto panels = static_cast<std::size_t>(std::max({1.0, by_width, by_beat}));
    auto integrand = [&](double t) {
        return std::conj(amplitude(p1, t)) * amplitude(p2, t);
    };
    return quadrature::integrate_checked(integrand, lo, hi, panels, tol).value;
}

/// Analytic overlap of two packets with equal tc:
///   exp(-2 dtau^2/tc^2 - domega^2 tc^2/2 + i (omega1+omega2)(tau2-tau1)/2)
/// with dtau, domega the half differences.
inline Complex overlap_closed(const GaussianPacket &p1, const GaussianPacket &p2) {
    const double scale = std::max(p1.tc(), p2.tc());
    if (std::abs(p1.tc() - p2.tc()) > 1e-12 * scale) {
        throw MismatchedCoherenceTime("overlap_closed requires equal tc");
    }
    const double tc = p1.tc();
    const double dtau = 0.5 * (p2.tau() - p1.tau());
    const double domega = 0.5 * (p2.omega0() - p1.omega0());
    const double log_mod = -2.0 * dtau * dtau / (tc * tc) -
                           0.5 * domega * domega * tc * tc;
    const double phase =
        0.5 * (p1.omega0() + p2.omega0()) * (p2.tau() - p1.tau());
    return std::exp(Complex(log_mod, phase));
}

/// |<xi1|xi2>|^2 = exp(-4 dtau^2/tc^2 - domega^2 tc^2).
inline double indistinguishability(double delta_tau, double delta_omega, double tc) {
    return std::exp(-4.0 * delta_tau * delta_tau / (tc * tc) -
                    delta_omega * delta_omega * tc * tc);
}

inline double indistinguishability(const PacketPair &pair) {
    return indistinguishability(pair.delta_tau(), pair.delta_omega(), pair.tc());
}

/// Laboratory description of the photon pair.
struct LabParameters {
    double delta_z_um = 0.0;      ///< path-length difference
    double lambda0_nm = 810.0;    ///< common center wavelength
    double delta_lambda_nm = 0.0; ///< center-wavelength difference
    double l_c_um = 60.0;         ///< coherence length
};

/// Packets at arrival times -/+ delta_z/c with tc = l_c/c. Packet 1 sits at
/// lambda0 + delta_lambda/2 and packet 2 at lambda0 - delta_lambda/2, so a
/// positive delta_lambda gives a positive delta_omega.
inline PacketPair packets_from_lab(double delta_z_um, double lambda0_nm,
                                   double delta_lambda_nm, double l_c_um) {
    if (!(l_c_um > 0.0)) {
        throw std::invalid_argument("coherence length must be positive");
    }
    if (!(lambda0_nm > 0.0) || !(lambda0_nm - 0.5 * std::abs(delta_lambda_nm) > 0.0)) {
        throw std::invalid_argument("wavelengths must be positive");
    }
    const double tc = units::time_from_path_fs(l_c_um);
    const double dtau = units::time_from_path_fs(delta_z_um);
    const double omega1 =
        units::angular_frequency_rad_per_fs(lambda0_nm + 0.5 * delta_lambda_nm);
    const double omega2 =
        units::angular_frequency_rad_per_fs(lambda0_nm - 0.5 * delta_lambda_nm);
    return {GaussianPacket(omega1, -dtau, tc), GaussianPacket(omega2, dtau, tc)};
}

inline PacketPair packets_from_lab(const LabParameters &lab) {
    return packets_from_lab(lab.delta_z_um, lab.lambda0_nm, lab.delta_lambda_nm,
                            lab.l_c_um);
}

} // namespace hompol
