#pragma once

#include <array>
#include <string>

#include "hompol/error.hpp"
#include "hompol/optics.hpp"

namespace hompol {

/// Photon numbers detected at the two PBS outputs (s3, s4).
class OutcomePattern {
  public:
    OutcomePattern(int n_c, int n_d) : n_c_(n_c), n_d_(n_d) {
        const int total = n_c + n_d;
        if (n_c < 0 || n_d < 0 || (total != 2 && total != 4)) {
            throw UnsupportedPattern("unsupported detection pattern " +
                                     std::to_string(n_c) + ":" +
                                     std::to_string(n_d));
        }
    }

    [[nodiscard]] int n_c() const { return n_c_; }
    [[nodiscard]] int n_d() const { return n_d_; }
    [[nodiscard]] int total() const { return n_c_ + n_d_; }
    [[nodiscard]] OutcomePattern swapped() const { return {n_d_, n_c_}; }
    [[nodiscard]] std::string label() const {
        return std::to_string(n_c_) + ":" + std::to_string(n_d_);
    }

    friend bool operator==(const OutcomePattern &, const OutcomePattern &) = default;

  private:
    int n_c_;
    int n_d_;
};

/// The five four-photon outcomes in canonical order.
inline const std::array<OutcomePattern, 5> &four_photon_patterns() {
    static const std::array<OutcomePattern, 5> patterns{
        OutcomePattern(4, 0), OutcomePattern(0, 4), OutcomePattern(3, 1),
        OutcomePattern(1, 3), OutcomePattern(2, 2)};
    return patterns;
}

inline const std::array<OutcomePattern, 3> &two_photon_patterns() {
    static const std::array<OutcomePattern, 3> patterns{
        OutcomePattern(2, 0), OutcomePattern(0, 2), OutcomePattern(1, 1)};
    return patterns;
}

/// Column names matching four_photon_patterns().
inline constexpr std::array<const char *, 5> kFourPhotonKeys{"40", "04", "31", "13",
                                                             "22"};

struct OutcomeDistribution {
    double p40 = 0.0;
    double p04 = 0.0;
    double p31 = 0.0;
    double p13 = 0.0;
    double p22 = 0.0;
    InterferometerSetting setting;

    /// Probabilities in four_photon_patterns() order.
    [[nodiscard]] std::array<double, 5> values() const {
        return {p40, p04, p31, p13, p22};
    }

    [[nodiscard]] double sum() const { return p40 + p04 + p31 + p13 + p22; }

    [[nodiscard]] double operator[](const OutcomePattern &m) const {
        if (m.total() != 4) {
            throw UnsupportedPattern("not a four-photon pattern: " + m.label());
        }
        switch (m.n_c()) {
        case 4:
            return p40;
        case 0:
            return p04;
        case 3:
            return p31;
        case 1:
            return p13;
        default:
            return p22;
        }
    }
};

struct TwoPhotonDistribution {
    double p20 = 0.0;
    double p02 = 0.0;
    double p11 = 0.0;

    [[nodiscard]] std::array<double, 3> values() const { return {p20, p02, p11}; }
    [[nodiscard]] double sum() const { return p20 + p02 + p11; }
};

} // namespace hompol
