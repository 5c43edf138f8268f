// Prints outcome probabilities and Fisher information at a few path
// differences for the default 810 nm, 60 um coherence-length source.

#include <cstdio>
#include <numbers>

#include "hompol/hompol.hpp"

int main() {
    using namespace hompol;
    constexpr double pi = std::numbers::pi;

    for (const double dz : {0.0, 10.0, 30.0, 60.0}) {
        const auto pair = packets_from_lab(dz, 810.0, 0.0, 60.0);
        std::printf("delta_z = %4.0f um   I = %.6f   QFI = %.4f\n", dz,
                    indistinguishability(pair), qfi_partial(4, indistinguishability(pair)));
        std::printf("  %8s %9s %9s %9s %9s\n", "phi", "P(4:0)", "P(3:1)", "P(2:2)", "F");
        for (int k = 0; k <= 8; ++k) {
            const double phi = pi * k / 8.0;
            const auto setting = InterferometerSetting::from_phase(phi, pair);
            const auto p = p4_closed(setting);
            std::printf("  %8.4f %9.6f %9.6f %9.6f %9.5f\n", phi, p.p40, p.p31, p.p22,
                        fisher(setting).fisher);
        }
    }
    return 0;
}
