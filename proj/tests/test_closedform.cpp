#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hompol/closedform.hpp"
#include "hompol/oracle.hpp"

using namespace hompol;

namespace {

constexpr double kPi = std::numbers::pi;

// The three probabilities exactly as printed (powers of sin and cos of 2 theta
// with both exponentials), used to cross-check the regrouped forms.
std::array<double, 3> textbook(double theta, double dtau, double domega, double tc) {
    const double s = std::sin(2 * theta);
    const double c = std::cos(2 * theta);
    const double e1 = std::exp(-4 * dtau * dtau / (tc * tc) - domega * domega * tc * tc);
    const double e2 = std::exp(-8 * dtau * dtau / (tc * tc) - 2 * domega * domega * tc * tc);
    const double s2 = s * s;
    const double c2 = c * c;
    const double p40 = c2 * c2 * s2 * s2 * (1 + e2 + 4 * e1);
    const double p31 = 2 * c2 * s2 *
                       (s2 * s2 + c2 * c2 + 2 * (s2 - c2) * (s2 - c2) * e1 - 2 * c2 * s2 * e2);
    const double p22 = s2 * s2 * s2 * s2 + 4 * c2 * c2 * s2 * s2 + c2 * c2 * c2 * c2 +
                       8 * (s2 * s2 * c2 * c2 - c2 * c2 * c2 * s2 - s2 * s2 * s2 * c2) * e1 +
                       6 * s2 * s2 * c2 * c2 * e2;
    return {p40, p31, p22};
}

struct Setting {
    double theta, dtau, domega, tc;
};

std::vector<Setting> random_settings(std::uint64_t seed, int n) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> th(0.0, kPi / 4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> tcs(50.0, 300.0);
    std::vector<Setting> out;
    for (int i = 0; i < n; ++i) {
        const double tc = tcs(gen);
        out.push_back({th(gen), 2 * tc * unit(gen), 2 * unit(gen) / tc, tc});
    }
    return out;
}

double fd(const std::function<double(double)> &f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

} // namespace

TEST(P4Closed, BalancedIndistinguishable) {
    const auto d = p4_closed(kPi / 8, 0.0, 0.0, 200.0);
    const std::array<double, 5> expected{3.0 / 8, 3.0 / 8, 0.0, 0.0, 0.25};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_NEAR(d.values()[i], expected[i], 1e-15);
    }
}

TEST(P4Closed, BalancedDistinguishable) {
    const auto d = p4_closed(kPi / 8, 1e4, 0.0, 200.0);
    EXPECT_NEAR(d.p22, 0.375, 1e-15);
    EXPECT_NEAR(d.p40, 1.0 / 16, 1e-15);
    EXPECT_NEAR(d.p31, 0.25, 1e-15);
    EXPECT_NEAR(d.sum(), 1.0, 1e-15);
}

TEST(P4Closed, TwoTwoZeroWhereSinSquaredIsTwoThirds) {
    const double phi0 = std::asin(std::sqrt(2.0 / 3.0));
    for (const double phi : {phi0, kPi - phi0}) {
        EXPECT_NEAR(p4_closed(phi / 4, 0.0, 0.0, 200.0).p22, 0.0, 1e-12);
    }
}

TEST(P4Closed, MatchesTextbookExpressions) {
    for (const auto &s : random_settings(41, 1000)) {
        const auto d = p4_closed(s.theta, s.dtau, s.domega, s.tc);
        const auto t = textbook(s.theta, s.dtau, s.domega, s.tc);
        EXPECT_NEAR(d.p40, t[0], 1e-14);
        EXPECT_NEAR(d.p31, t[1], 1e-14);
        EXPECT_NEAR(d.p22, t[2], 1e-14);
        EXPECT_EQ(d.p40, d.p04);
        EXPECT_EQ(d.p31, d.p13);
    }
}

TEST(P4Closed, NormalizedAndInRange) {
    for (const auto &s : random_settings(43, 1000)) {
        const auto d = p4_closed(s.theta, s.dtau, s.domega, s.tc);
        EXPECT_NEAR(d.sum(), 1.0, 1e-12);
        for (const double p : d.values()) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
    }
}

TEST(P4Closed, AgreesWithOracle) {
    for (const auto &s : random_settings(47, 100)) {
        const auto pair = reference_pair(s.dtau, s.domega, s.tc);
        const auto closed = p4_closed(InterferometerSetting(s.theta, pair));
        const auto brute = oracle::distribution_oracle(oracle::four_photon_input(pair), s.theta);
        for (std::size_t i = 0; i < 5; ++i) {
            EXPECT_NEAR(closed.values()[i], brute.values()[i], 1e-8);
        }
    }
}

TEST(P4Closed, RejectsNonPositiveCoherenceTime) {
    EXPECT_THROW(p4_closed(0.1, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST(P4Derivative, SumsToZero) {
    for (const auto &s : random_settings(53, 1000)) {
        const auto d = p4_derivative(s.theta, s.dtau, s.domega, s.tc);
        EXPECT_NEAR(d[0] + d[1] + d[2] + d[3] + d[4], 0.0, 1e-12);
    }
}

TEST(P4Derivative, FourZeroStationaryAtBalancedPoint) {
    EXPECT_NEAR(p4_derivative(kPi / 8, 0.0, 0.0, 200.0)[0], 0.0, 1e-15);
}

TEST(P4Derivative, MatchesCentralDifferences) {
    const double h = 1e-5;
    for (const auto &s : random_settings(59, 1000)) {
        const auto d = p4_derivative(s.theta, s.dtau, s.domega, s.tc);
        for (std::size_t m = 0; m < 5; ++m) {
            const double numeric = fd(
                [&](double phi) {
                    return p4_closed(phi / 4, s.dtau, s.domega, s.tc).values()[m];
                },
                4 * s.theta, h);
            EXPECT_LE(std::abs(d[m] - numeric), 1e-6 * std::max(std::abs(d[m]), 1.0));
        }
    }
}

TEST(P4SecondDerivative, MatchesDifferenceOfFirstDerivative) {
    const double h = 1e-5;
    for (const auto &s : random_settings(61, 200)) {
        const auto f = OverlapFactors::from_packets(s.dtau, s.domega, s.tc);
        const auto d2 = p4_second_derivative(s.theta, f);
        for (std::size_t m = 0; m < 5; ++m) {
            const double numeric =
                fd([&](double phi) { return p4_derivative(phi / 4, f)[m]; }, 4 * s.theta, h);
            EXPECT_NEAR(d2[m], numeric, 1e-6 * std::max(std::abs(d2[m]), 1.0));
        }
    }
}

TEST(P4Closed, TwoTwoHasThreeInteriorCriticalPoints) {
    const auto f = OverlapFactors::from_indistinguishability(1.0);
    const int n = 20000;
    int sign_changes = 0;
    double previous = p4_derivative(kPi / (4.0 * n), f)[4];
    std::vector<double> where;
    for (int i = 2; i < n; ++i) {
        const double phi = kPi * i / n;
        const double d = p4_derivative(phi / 4, f)[4];
        if ((d > 0) != (previous > 0)) {
            ++sign_changes;
            where.push_back(phi);
        }
        previous = d;
    }
    ASSERT_EQ(sign_changes, 3);
    const double phi0 = std::asin(std::sqrt(2.0 / 3.0));
    EXPECT_NEAR(where[0], phi0, 2 * kPi / n);
    EXPECT_NEAR(where[1], kPi / 2, 2 * kPi / n);
    EXPECT_NEAR(where[2], kPi - phi0, 2 * kPi / n);
    EXPECT_NEAR(p4_values(kPi / 8, f)[4], 0.25, 1e-15);
}

TEST(P4Closed, FigureTwoFeatures) {
    const double tc = units::time_from_path_fs(60.0);
    EXPECT_NEAR(p4_closed(kPi / 8, 0.0, 0.0, tc).p31, 0.0, 1e-15);
    const double peak = p4_closed(kPi / 8, 0.0, 0.0, tc).p40;
    for (int i = 0; i <= 400; ++i) {
        const double phi = kPi * i / 400;
        EXPECT_LE(p4_closed(phi / 4, 0.0, 0.0, tc).p40, peak + 1e-15);
    }
    // The 4:0 peak drops as the path difference grows.
    double last = peak;
    for (int dz = 1; dz <= 90; ++dz) {
        const auto pair = packets_from_lab(dz, 810.0, 0.0, 60.0);
        const double p = p4_closed(InterferometerSetting(kPi / 8, pair)).p40;
        EXPECT_LT(p, last);
        last = p;
    }
}

TEST(OverlapFactors, ComplementsWithoutCancellation) {
    const auto f = OverlapFactors::from_exponent(-1e-20);
    EXPECT_NEAR(f.one_minus_e1, 1e-20, 1e-35);
    EXPECT_NEAR(f.one_minus_e2, 2e-20, 1e-35);
    const auto g = OverlapFactors::from_indistinguishability(0.3);
    EXPECT_DOUBLE_EQ(g.e2, 0.09);
    EXPECT_DOUBLE_EQ(g.one_minus_e2, 0.91);
}

TEST(P2Closed, HomLimits) {
    EXPECT_NEAR(p2_closed(kPi / 8, 1.0).p11, 0.0, 1e-15);
    EXPECT_NEAR(p2_closed(kPi / 8, 0.0).p11, 0.5, 1e-15);
    for (const double indist : {0.0, 0.3, 1.0}) {
        EXPECT_NEAR(p2_closed(0.0, indist).p11, 1.0, 1e-15);
        EXPECT_NEAR(p2_closed(kPi / 8, indist).p11, (1 - indist) / 2, 1e-15);
    }
}

TEST(P2Closed, AgreesWithTwoPhotonOracle) {
    for (const auto &s : random_settings(67, 100)) {
        const auto pair = reference_pair(s.dtau, s.domega, s.tc);
        const auto closed = p2_closed(s.theta, pair);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_NEAR(closed.values()[i],
                        oracle::two_photon_oracle(pair, s.theta, two_photon_patterns()[i]),
                        1e-12);
        }
        EXPECT_NEAR(closed.sum(), 1.0, 1e-14);
    }
}

TEST(P2Derivative, MatchesCentralDifferences) {
    const double h = 1e-5;
    for (const auto &s : random_settings(71, 100)) {
        const auto f = OverlapFactors::from_packets(s.dtau, s.domega, s.tc);
        const auto d = p2_derivative(s.theta, f);
        for (std::size_t m = 0; m < 3; ++m) {
            const double numeric =
                fd([&](double phi) { return p2_closed(phi / 4, f).values()[m]; }, 4 * s.theta, h);
            EXPECT_NEAR(d[m], numeric, 1e-6 * std::max(std::abs(d[m]), 1.0));
        }
    }
}
