#pragma once

// Brute-force detection probabilities from the temporal correlation
// operators.
//
// For an outcome n_c:n_d the operator is
//   A = 1/(n_c! n_d!) a_o1^dag(t1)..a_on^dag(tn) a_on(tn)..a_o1(t1),
// with the first n_c slots on output s3 and the rest on s4. Every output
// operator is replaced by its expansion over the input modes, the products
// are distributed, and only strings compatible with the input occupation
// survive. Each surviving term is evaluated from the ladder rules
// a|n> = sqrt(n)|n-1> and integrated slot by slot, which factorizes into
// single-time overlaps <xi_i|xi_j>.
//
// This module does not use the closed forms; it is the reference they are
// checked against.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "hompol/error.hpp"
#include "hompol/optics.hpp"
#include "hompol/outcome.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol::oracle {

/// One distributed term: coefficient times a creation string and an
/// annihilation string over input modes (0 = s1, 1 = s2), indexed by time
/// slot t1..tn.
struct OperatorTerm {
    Complex coefficient;
    std::vector<int> creation_modes;
    std::vector<int> annihilation_modes;
};

/// Number state with `occupation[k]` photons in input polarization mode k,
/// all of them in the temporal mode of pair.first()/second() respectively.
class FockInput {
  public:
    FockInput(std::array<int, 2> occupation, PacketPair pair)
        : occupation_(occupation), pair_(pair) {
        if (occupation[0] < 0 || occupation[1] < 0) {
            throw std::invalid_argument("negative occupation");
        }
    }

    [[nodiscard]] const std::array<int, 2> &occupation() const { return occupation_; }
    [[nodiscard]] const PacketPair &pair() const { return pair_; }
    [[nodiscard]] int photons() const { return occupation_[0] + occupation_[1]; }
    [[nodiscard]] const GaussianPacket &packet(int mode) const {
        return mode == 0 ? pair_.first() : pair_.second();
    }

  private:
    std::array<int, 2> occupation_;
    PacketPair pair_;
};

/// |2_xi1>_s1 |2_xi2>_s2.
inline FockInput four_photon_input(const PacketPair &pair) {
    return FockInput({2, 2}, pair);
}

/// |1_xi1>_s1 |1_xi2>_s2.
inline FockInput two_photon_input(const PacketPair &pair) {
    return FockInput({1, 1}, pair);
}

enum class OverlapBackend { closed, numeric };

/// <xi_i|xi_j> for i, j in {0, 1}.
class OverlapTable {
  public:
    OverlapTable(const FockInput &input, OverlapBackend backend) {
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                table_[i][j] = backend == OverlapBackend::numeric
                                   ? overlap_numeric(input.packet(i), input.packet(j))
                                   : overlap_closed(input.packet(i), input.packet(j));
            }
        }
    }

    [[nodiscard]] Complex operator()(int i, int j) const { return table_[i][j]; }

  private:
    std::array<std::array<Complex, 2>, 2> table_{};
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) {
        f *= k;
    }
    return f;
}

/// Input-mode strings of length n with at most occupation[k] entries equal
/// to k, each with its amplitude prod_q u(out_q, in_q).
struct ModeString {
    std::vector<int> modes;
    Complex amplitude;
};

inline std::vector<ModeString> surviving_strings(const std::vector<int> &outputs,
                                                 const ModeTransform &u,
                                                 const std::array<int, 2> &occupation) {
    const auto n = outputs.size();
    std::vector<ModeString> out;
    for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
        ModeString s{std::vector<int>(n), Complex(1.0)};
        std::array<int, 2> used{0, 0};
        for (std::size_t q = 0; q < n; ++q) {
            const int mode = static_cast<int>((bits >> q) & 1U);
            s.modes[q] = mode;
            ++used[mode];
            s.amplitude *= u(static_cast<std::size_t>(outputs[q]),
                             static_cast<std::size_t>(mode));
        }
        if (used[0] <= occupation[0] && used[1] <= occupation[1]) {
            out.push_back(std::move(s));
        }
    }
    return out;
}

/// Product of sqrt(n) factors picked up when the annihilators of `modes`
/// act on the input state in slot order; zero if a mode runs dry.
inline double ladder_factor(const std::vector<int> &modes,
                            std::array<int, 2> occupation) {
    double factor = 1.0;
    for (const int m : modes) {
        if (occupation[m] <= 0) {
            return 0.0;
        }
        factor *= std::sqrt(static_cast<double>(occupation[m]));
        --occupation[m];
    }
    return factor;
}

} // namespace detail

/// Expands the correlation operator of `pattern` for a general mode
/// transform. The input occupation is (1,1) for two-photon patterns and
/// (2,2) for four-photon ones.
inline std::vector<OperatorTerm> expand_pattern_operator(const OutcomePattern &pattern,
                                                         const ModeTransform &u) {
    const int n = pattern.total();
    if (n != 2 && n != 4) {
        throw UnsupportedPattern("only two- and four-photon patterns are supported");
    }
    const std::array<int, 2> occupation{n / 2, n / 2};
    std::vector<int> outputs(static_cast<std::size_t>(n), 1);
    std::fill_n(outputs.begin(), pattern.n_c(), 0);

    const auto strings = detail::surviving_strings(outputs, u, occupation);
    const double norm =
        1.0 / (detail::factorial(pattern.n_c()) * detail::factorial(pattern.n_d()));

    std::vector<OperatorTerm> terms;
    terms.reserve(strings.size() * strings.size());
    for (const auto &create : strings) {
        for (const auto &annihilate : strings) {
            terms.push_back({norm * create.amplitude * std::conj(annihilate.amplitude),
                             create.modes, annihilate.modes});
        }
    }
    return terms;
}

inline std::vector<OperatorTerm> expand_pattern_operator(const OutcomePattern &pattern,
                                                         double theta) {
    return expand_pattern_operator(pattern, hwp_pbs_transform(theta));
}

/// Ladder (bosonic) factor of a term for the given input occupation, e.g. 4
/// for every surviving term on |2,2>.
inline double bosonic_factor(const OperatorTerm &term, const FockInput &input) {
    return detail::ladder_factor(term.creation_modes, input.occupation()) *
           detail::ladder_factor(term.annihilation_modes, input.occupation());
}

inline Complex evaluate_term(const OperatorTerm &term, const FockInput &input,
                             const OverlapTable &overlaps) {
    if (term.creation_modes.size() != term.annihilation_modes.size() ||
        static_cast<int>(term.creation_modes.size()) != input.photons()) {
        throw std::invalid_argument("term does not match the input photon number");
    }
    const double ladder = bosonic_factor(term, input);
    if (ladder == 0.0) {
        return {0.0, 0.0};
    }
    Complex value = term.coefficient * ladder;
    for (std::size_t q = 0; q < term.creation_modes.size(); ++q) {
        value *= overlaps(term.creation_modes[q], term.annihilation_modes[q]);
    }
    return value;
}

inline Complex evaluate_term(const OperatorTerm &term, const FockInput &input,
                             OverlapBackend backend = OverlapBackend::closed) {
    return evaluate_term(term, input, OverlapTable(input, backend));
}

namespace detail {

inline double to_probability(Complex sum, const OutcomePattern &pattern) {
    if (std::abs(sum.imag()) > 1e-10) {
        throw NonPhysicalProbability("pattern " + pattern.label() +
                                     " has imaginary residue " +
                                     std::to_string(sum.imag()));
    }
    const double p = sum.real();
    if (p < -1e-9 || p > 1.0 + 1e-9) {
        throw NonPhysicalProbability("pattern " + pattern.label() +
                                     " gave probability " + std::to_string(p));
    }
    return p;
}

} // namespace detail

inline double probability_oracle(const FockInput &input, const ModeTransform &u,
                                 const OutcomePattern &pattern,
                                 const OverlapTable &overlaps) {
    if (pattern.total() != input.photons()) {
        throw UnsupportedPattern("pattern " + pattern.label() + " does not match a " +
                                 std::to_string(input.photons()) + "-photon input");
    }
    Complex sum{0.0, 0.0};
    for (const auto &term : expand_pattern_operator(pattern, u)) {
        sum += evaluate_term(term, input, overlaps);
    }
    return detail::to_probability(sum, pattern);
}

inline double probability_oracle(const FockInput &input, double theta,
                                 const OutcomePattern &pattern,
                                 OverlapBackend backend = OverlapBackend::closed) {
    return probability_oracle(input, hwp_pbs_transform(theta), pattern,
                              OverlapTable(input, backend));
}

inline OutcomeDistribution distribution_oracle(const FockInput &input, double theta,
                                               OverlapBackend backend =
                                                   OverlapBackend::closed) {
    if (input.occupation() != std::array<int, 2>{2, 2}) {
        throw UnsupportedPattern("distribution_oracle expects the |2,2> input");
    }
    const OverlapTable overlaps(input, backend);
    const ModeTransform u = hwp_pbs_transform(theta);
    std::array<double, 5> p{};
    for (std::size_t i = 0; i < 5; ++i) {
        p[i] = probability_oracle(input, u, four_photon_patterns()[i], overlaps);
    }
    return {p[0], p[1], p[2], p[3], p[4], InterferometerSetting(theta, input.pair())};
}

inline double two_photon_oracle(const PacketPair &pair, double theta,
                                const OutcomePattern &pattern,
                                OverlapBackend backend = OverlapBackend::closed) {
    if (pattern.total() != 2) {
        throw UnsupportedPattern("two_photon_oracle needs a two-photon pattern");
    }
    return probability_oracle(two_photon_input(pair), theta, pattern, backend);
}

} // namespace hompol::oracle
