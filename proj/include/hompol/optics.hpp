#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "hompol/error.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol {

/// HWP angle plus the photon pair entering the interferometer. The phase is
/// always derived from theta: phi = 4 theta.
class InterferometerSetting {
  public:
    InterferometerSetting(double theta, PacketPair pair)
        : theta_(theta), pair_(pair) {}

    static InterferometerSetting from_phase(double phi, PacketPair pair) {
        return {phi / 4.0, pair};
    }

    [[nodiscard]] double theta() const { return theta_; }
    [[nodiscard]] double phi() const { return 4.0 * theta_; }
    [[nodiscard]] const PacketPair &pair() const { return pair_; }

  private:
    double theta_;
    PacketPair pair_;
};

/// 2x2 map from input creation operators (s1, s2) to output ones (s3, s4):
/// a_out^dag[r] = sum_c u(r, c) a_in^dag[c].
class ModeTransform {
  public:
    using Matrix = std::array<std::array<Complex, 2>, 2>;

    explicit ModeTransform(const Matrix &u) : u_(u) {}

    [[nodiscard]] const Complex &operator()(std::size_t row, std::size_t col) const {
        return u_[row][col];
    }
    [[nodiscard]] const Matrix &matrix() const { return u_; }

    [[nodiscard]] ModeTransform operator*(const ModeTransform &rhs) const {
        Matrix out{};
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                out[i][j] = u_[i][0] * rhs.u_[0][j] + u_[i][1] * rhs.u_[1][j];
            }
        }
        return ModeTransform(out);
    }

    [[nodiscard]] ModeTransform adjoint() const {
        return ModeTransform(Matrix{{{std::conj(u_[0][0]), std::conj(u_[1][0])},
                                     {std::conj(u_[0][1]), std::conj(u_[1][1])}}});
    }

    [[nodiscard]] ModeTransform with_global_phase(double alpha) const {
        const Complex g = std::polar(1.0, alpha);
        return ModeTransform(
            Matrix{{{g * u_[0][0], g * u_[0][1]}, {g * u_[1][0], g * u_[1][1]}}});
    }

    /// Largest entrywise deviation of u u^dag from the identity.
    [[nodiscard]] double unitarity_defect() const {
        const ModeTransform prod = *this * adjoint();
        double worst = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                const Complex target = (i == j) ? Complex(1.0) : Complex(0.0);
                worst = std::max(worst, std::abs(prod(i, j) - target));
            }
        }
        return worst;
    }

  private:
    Matrix u_;
};

/// Half-wave plate at angle theta between two PBSs:
/// -i [[cos 2theta, sin 2theta], [sin 2theta, -cos 2theta]].
/// The global -i is kept as written; it drops out of every probability.
inline ModeTransform hwp_pbs_transform(double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const Complex mi(0.0, -1.0);
    return ModeTransform(
        ModeTransform::Matrix{{{mi * c, mi * s}, {mi * s, -mi * c}}});
}

/// Holland-Burnett state sum_n c_n |2n, N-2n>.
struct HollandBurnettState {
    int n_photons = 0;
    std::vector<double> coefficients; ///< c_0 .. c_{N/2}
};

namespace detail {

inline std::uint64_t factorial_u64(int n) {
    std::uint64_t f = 1;
    for (int k = 2; k <= n; ++k) {
        f *= static_cast<std::uint64_t>(k);
    }
    return f;
}

} // namespace detail

/// c_n = sqrt((2n)! (N-2n)!) / (2^{N/2} n! (N/2-n)!) for even 2 <= N <= 20.
/// c_n^2 is formed as an exact reduced fraction before the square root.
inline HollandBurnettState hb_coefficients(int n_photons) {
    if (n_photons < 2 || n_photons % 2 != 0) {
        throw InvalidPhotonNumber("Holland-Burnett state needs an even photon "
                                  "number >= 2, got " +
                                  std::to_string(n_photons));
    }
    if (n_photons > 20) {
        throw InvalidPhotonNumber("photon number above 20 is not supported");
    }
    using u128 = unsigned __int128;
    const int half = n_photons / 2;
    HollandBurnettState state{n_photons, {}};
    state.coefficients.reserve(static_cast<std::size_t>(half) + 1);
    for (int n = 0; n <= half; ++n) {
        u128 num = static_cast<u128>(detail::factorial_u64(2 * n)) *
                   detail::factorial_u64(n_photons - 2 * n);
        const u128 den_root = (static_cast<u128>(1) << half) *
                              detail::factorial_u64(n) *
                              detail::factorial_u64(half - n);
        u128 den = den_root * den_root;
        // Euclid on 128-bit values.
        u128 a = num;
        u128 b = den;
        while (b != 0) {
            const u128 r = a % b;
            a = b;
            b = r;
        }
        num /= a;
        den /= a;
        const long double ratio =
            static_cast<long double>(num) / static_cast<long double>(den);
        state.coefficients.push_back(static_cast<double>(std::sqrt(ratio)));
    }
    return state;
}

} // namespace hompol
