#pragma once

// Photon-counting experiments: forward simulation of four-fold counts,
// least-squares fits of the closed-form model, the two-photon HOM dip fit
// and parametric-bootstrap bands for the Fisher information.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hompol/closedform.hpp"
#include "hompol/error.hpp"
#include "hompol/estimation.hpp"
#include "hompol/parallel.hpp"
#include "hompol/rng.hpp"
#include "hompol/simplex.hpp"
#include "hompol/wavepacket.hpp"

namespace hompol {

using CountRow = std::array<std::int64_t, 5>;

struct Acquisition {
    double rate_hz = 0.0;
    double duration_s = 0.0;
};

/// Four-fold counts per HWP setting, columns in four_photon_patterns()
/// order. The shots of a setting are the sum of its row.
struct CountsDataset {
    std::vector<double> theta;
    std::vector<CountRow> counts;
    std::uint64_t rng_seed = 0;
    std::optional<Acquisition> acquisition;

    [[nodiscard]] std::size_t size() const { return theta.size(); }

    [[nodiscard]] std::int64_t shots(std::size_t i) const {
        std::int64_t n = 0;
        for (const auto c : counts[i]) {
            n += c;
        }
        return n;
    }

    /// Throws DataFormatError on ragged input or negative counts.
    void validate() const {
        if (theta.size() != counts.size()) {
            throw DataFormatError("settings and count rows differ in length");
        }
        for (std::size_t i = 0; i < counts.size(); ++i) {
            for (const auto c : counts[i]) {
                if (c < 0) {
                    throw DataFormatError("negative count in row " + std::to_string(i));
                }
            }
            if (!std::isfinite(theta[i])) {
                throw DataFormatError("non-finite angle in row " + std::to_string(i));
            }
        }
    }
};

/// Physical model behind the counts: the photon pair plus a flat background
/// fraction b, P_obs = (1 - b) P + b / 5.
struct ModelParameters {
    LabParameters lab;
    double background = 0.0;
};

inline std::array<double, 5> observed_probabilities(double theta,
                                                    const OverlapFactors &f,
                                                    double background) {
    auto p = p4_values(theta, f);
    for (auto &x : p) {
        x = (1.0 - background) * x + background / 5.0;
    }
    return p;
}

namespace detail {

/// Multinomial draw as a chain of conditional binomials.
template <class Rng>
CountRow draw_multinomial(std::int64_t shots, const std::array<double, 5> &p, Rng &rng) {
    CountRow out{};
    std::int64_t remaining = shots;
    double mass = 1.0;
    for (std::size_t k = 0; k + 1 < 5; ++k) {
        if (remaining <= 0) {
            break;
        }
        const double q = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> binom(remaining, q);
        out[k] = binom(rng);
        remaining -= out[k];
        mass -= p[k];
    }
    out[4] = std::max<std::int64_t>(remaining, 0);
    return out;
}

} // namespace detail

/// Per setting i: shots ~ Poisson(mean_events), then a multinomial split
/// over the five outcomes. Setting i draws from KeyedRng(seed, i).
inline CountsDataset simulate_counts(const ModelParameters &model,
                                     std::span<const double> theta_grid,
                                     double mean_events_per_setting, std::uint64_t seed,
                                     unsigned threads = 1) {
    if (!(mean_events_per_setting > 0.0)) {
        throw std::invalid_argument("mean events per setting must be positive");
    }
    if (!(model.background >= 0.0 && model.background < 1.0)) {
        throw std::invalid_argument("background fraction must lie in [0, 1)");
    }
    const auto factors = OverlapFactors::from_pair(packets_from_lab(model.lab));
    CountsDataset data;
    data.theta.assign(theta_grid.begin(), theta_grid.end());
    data.counts.resize(theta_grid.size());
    data.rng_seed = seed;
    parallel_for(theta_grid.size(), threads, [&](std::size_t i) {
        KeyedRng rng(seed, i, 0);
        std::poisson_distribution<std::int64_t> poisson(mean_events_per_setting);
        const std::int64_t shots = poisson(rng);
        data.counts[i] = detail::draw_multinomial(
            shots, observed_probabilities(theta_grid[i], factors, model.background), rng);
    });
    return data;
}

// ---------------------------------------------------------------------------
// Fitting

/// Which physical parameters are free and where the search starts. The
/// path difference and the wavelength offset only enter through the
/// overlap, so fitting both at once is degenerate; by default the
/// wavelength offset stays fixed.
struct FitConfig {
    double lambda0_nm = 810.0;
    double l_c_um = 60.0;
    double delta_z_um = 5.0;      ///< start value (or fixed value)
    double delta_lambda_nm = 0.0; ///< start value (or fixed value)
    double background = 0.01;     ///< start value (or fixed value)
    bool fit_delta_z = true;
    bool fit_delta_lambda = false;
    bool fit_background = true;
    simplex::Options optimizer{};

    [[nodiscard]] int free_parameters() const {
        return static_cast<int>(fit_delta_z) + static_cast<int>(fit_delta_lambda) +
               static_cast<int>(fit_background);
    }
};

struct FitResult {
    double delta_z_um = 0.0;
    double delta_lambda_nm = 0.0;
    double background = 0.0;
    double lambda0_nm = 0.0;
    double l_c_um = 0.0;
    double residual = 0.0;
    int n_evaluations = 0;
    int n_restarts = 0;
    bool converged = false;

    [[nodiscard]] LabParameters lab() const {
        return {delta_z_um, lambda0_nm, delta_lambda_nm, l_c_um};
    }
    [[nodiscard]] ModelParameters model() const { return {lab(), background}; }
    [[nodiscard]] double indistinguishability() const {
        return hompol::indistinguishability(packets_from_lab(lab()));
    }
};

namespace detail {

inline constexpr double kDeltaZScaleUm = 10.0;
inline constexpr double kDeltaLambdaScaleNm = 1.0;

inline double softplus(double x) {
    return x > 30.0 ? x : std::log1p(std::exp(x));
}
inline double softplus_inverse(double y) {
    return y > 30.0 ? y : std::log(std::expm1(std::max(y, 1e-300)));
}
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) {
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return std::log(p / (1.0 - p));
}

/// Frequencies and inverse-variance weights of one setting,
/// var = max(f (1 - f) / n, 1 / n^2).
struct WeightedRow {
    double theta;
    std::array<double, 5> freq;
    std::array<double, 5> weight;
};

inline std::vector<WeightedRow> weighted_rows(const CountsDataset &data) {
    std::vector<WeightedRow> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto n = static_cast<double>(data.shots(i));
        if (n <= 0.0) {
            continue;
        }
        WeightedRow row{data.theta[i], {}, {}};
        for (std::size_t k = 0; k < 5; ++k) {
            const double f = static_cast<double>(data.counts[i][k]) / n;
            row.freq[k] = f;
            row.weight[k] = 1.0 / std::max(f * (1.0 - f) / n, 1.0 / (n * n));
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::size_t distinct_settings(const std::vector<WeightedRow> &rows) {
    std::vector<double> thetas;
    thetas.reserve(rows.size());
    for (const auto &r : rows) {
        thetas.push_back(r.theta);
    }
    std::sort(thetas.begin(), thetas.end());
    return static_cast<std::size_t>(std::unique(thetas.begin(), thetas.end()) -
                                    thetas.begin());
}

/// Maps the free coordinates of the optimizer onto physical values.
class FitParameterization {
  public:
    explicit FitParameterization(const FitConfig &config) : config_(config) {}

    [[nodiscard]] std::vector<double> start() const {
        std::vector<double> x;
        if (config_.fit_delta_z) {
            x.push_back(softplus_inverse(std::abs(config_.delta_z_um) / kDeltaZScaleUm));
        }
        if (config_.fit_delta_lambda) {
            x.push_back(softplus_inverse(std::abs(config_.delta_lambda_nm) /
                                         kDeltaLambdaScaleNm));
        }
        if (config_.fit_background) {
            x.push_back(logit(config_.background));
        }
        return x;
    }

    [[nodiscard]] ModelParameters decode(const std::vector<double> &x) const {
        ModelParameters m{{config_.delta_z_um, config_.lambda0_nm,
                           config_.delta_lambda_nm, config_.l_c_um},
                          config_.background};
        std::size_t k = 0;
        if (config_.fit_delta_z) {
            m.lab.delta_z_um = kDeltaZScaleUm * softplus(x[k++]);
        }
        if (config_.fit_delta_lambda) {
            m.lab.delta_lambda_nm = kDeltaLambdaScaleNm * softplus(x[k++]);
        }
        if (config_.fit_background) {
            m.background = logistic(x[k++]);
        }
        return m;
    }

  private:
    FitConfig config_;
};

inline double weighted_residual(const std::vector<WeightedRow> &rows,
                                const ModelParameters &model) {
    const auto factors = OverlapFactors::from_pair(packets_from_lab(model.lab));
    double sum = 0.0;
    for (const auto &row : rows) {
        const auto p = observed_probabilities(row.theta, factors, model.background);
        for (std::size_t k = 0; k < 5; ++k) {
            const double r = row.freq[k] - p[k];
            sum += row.weight[k] * r * r;
        }
    }
    return sum;
}

} // namespace detail

/// Weighted least-squares fit of the background-mixed closed-form model.
/// Path difference and wavelength offset are kept non-negative through a
/// softplus map and the background in (0, 1) through a logistic map.
inline FitResult fit_counts(const CountsDataset &data, const FitConfig &config) {
    data.validate();
    const auto rows = detail::weighted_rows(data);
    if (rows.empty()) {
        throw DegenerateData("dataset has no events");
    }
    const auto distinct = detail::distinct_settings(rows);
    if (distinct < 2) {
        throw DegenerateData("all settings are identical");
    }
    if (static_cast<int>(distinct) < config.free_parameters()) {
        throw DegenerateData("fewer informative settings than free parameters");
    }
    const detail::FitParameterization params(config);
    const simplex::Objective objective = [&](const std::vector<double> &x) {
        return detail::weighted_residual(rows, params.decode(x));
    };
    const auto best = simplex::minimize(objective, params.start(), config.optimizer);
    if (!best.converged) {
        throw FitNotConverged("simplex search did not settle after " +
                              std::to_string(best.n_restarts) + " restarts");
    }
    const auto model = params.decode(best.x);
    FitResult out;
    out.delta_z_um = model.lab.delta_z_um;
    out.delta_lambda_nm = model.lab.delta_lambda_nm;
    out.background = model.background;
    out.lambda0_nm = config.lambda0_nm;
    out.l_c_um = config.l_c_um;
    out.residual = best.value;
    out.n_evaluations = best.n_evaluations;
    out.n_restarts = best.n_restarts;
    out.converged = best.converged;
    return out;
}

// ---------------------------------------------------------------------------
// Two-photon HOM dip

struct HomDipData {
    std::vector<double> delta_z_um;
    std::vector<std::int64_t> pairs;
    std::vector<std::int64_t> coincidences;

    void validate() const {
        if (delta_z_um.size() != pairs.size() || pairs.size() != coincidences.size()) {
            throw DataFormatError("HOM dip columns differ in length");
        }
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            if (pairs[i] < 0 || coincidences[i] < 0 || coincidences[i] > pairs[i]) {
                throw DataFormatError("invalid counts in HOM dip row " +
                                      std::to_string(i));
            }
        }
    }
};

/// Dip shape (1 - V exp(-4 (dz - z0)^2 / l_c^2)) / 2.
struct HomDipModel {
    double visibility = 1.0;
    double center_um = 0.0;
    double l_c_um = 60.0;

    /// Coincidence probability at the balanced setting theta = pi/8.
    [[nodiscard]] double coincidence_probability(double delta_z_um) const {
        const double x = (delta_z_um - center_um) / l_c_um;
        const double indist = visibility * std::exp(-4.0 * x * x);
        return p2_closed(std::numbers::pi / 8.0, indist).p11;
    }
};

inline HomDipData simulate_hom_dip(const HomDipModel &truth,
                                   std::span<const double> delta_z_grid,
                                   std::int64_t pairs_per_point, std::uint64_t seed) {
    if (pairs_per_point <= 0) {
        throw std::invalid_argument("pairs per point must be positive");
    }
    HomDipData data;
    data.delta_z_um.assign(delta_z_grid.begin(), delta_z_grid.end());
    data.pairs.assign(delta_z_grid.size(), pairs_per_point);
    data.coincidences.resize(delta_z_grid.size());
    for (std::size_t i = 0; i < delta_z_grid.size(); ++i) {
        KeyedRng rng(seed, i, 0);
        std::binomial_distribution<std::int64_t> binom(
            pairs_per_point, truth.coincidence_probability(delta_z_grid[i]));
        data.coincidences[i] = binom(rng);
    }
    return data;
}

struct HomDipFit {
    HomDipModel model;
    double residual = 0.0;
    int n_evaluations = 0;
    bool converged = false;
};

/// Fits visibility, center and coherence length. `l_c_guess_um` seeds the
/// width; the scanned range must cover at least twice that.
inline HomDipFit hom_dip_fit(const HomDipData &data, double l_c_guess_um,
                             const simplex::Options &options = {}) {
    data.validate();
    if (data.delta_z_um.size() < 3) {
        throw DegenerateData("HOM dip fit needs at least three points");
    }
    if (!(l_c_guess_um > 0.0)) {
        throw std::invalid_argument("coherence length guess must be positive");
    }
    const auto [lo, hi] =
        std::minmax_element(data.delta_z_um.begin(), data.delta_z_um.end());
    if (*hi - *lo < 2.0 * l_c_guess_um) {
        throw DegenerateData("scan must span at least one coherence length on "
                             "each side of the dip");
    }

    struct Row {
        double dz, freq, weight;
    };
    std::vector<Row> rows;
    std::size_t best_row = 0;
    double lowest = 2.0;
    for (std::size_t i = 0; i < data.pairs.size(); ++i) {
        const auto n = static_cast<double>(data.pairs[i]);
        if (n <= 0.0) {
            continue;
        }
        const double f = static_cast<double>(data.coincidences[i]) / n;
        rows.push_back({data.delta_z_um[i], f,
                        1.0 / std::max(f * (1.0 - f) / n, 1.0 / (n * n))});
        if (f < lowest) {
            lowest = f;
            best_row = rows.size() - 1;
        }
    }
    if (rows.size() < 3) {
        throw DegenerateData("HOM dip fit needs at least three non-empty points");
    }

    const double width_scale = l_c_guess_um;
    auto decode = [&](const std::vector<double> &x) {
        return HomDipModel{detail::logistic(x[0]), x[1] * width_scale,
                           width_scale * detail::softplus(x[2])};
    };
    const simplex::Objective objective = [&](const std::vector<double> &x) {
        const auto m = decode(x);
        double sum = 0.0;
        for (const auto &r : rows) {
            const double d = r.freq - m.coincidence_probability(r.dz);
            sum += r.weight * d * d;
        }
        return sum;
    };
    const double v0 = std::clamp(1.0 - 2.0 * lowest, 0.05, 0.95);
    const std::vector<double> x0{detail::logit(v0), rows[best_row].dz / width_scale,
                                 detail::softplus_inverse(1.0)};
    const auto best = simplex::minimize(objective, x0, options);
    if (!best.converged) {
        throw FitNotConverged("HOM dip fit did not converge");
    }
    return {decode(best.x), best.value, best.n_evaluations, best.converged};
}

// ---------------------------------------------------------------------------
// Monte Carlo band

struct FisherBand {
    std::vector<double> phi;
    std::vector<double> nominal; ///< F of the point fit
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<double> lower; ///< mean - stddev
    std::vector<double> upper; ///< mean + stddev
    int n_resamples = 0;
    int n_failed = 0;
};

/// Fisher information of the fitted interference model (background
/// excluded) on a phase grid.
inline std::vector<double> fisher_curve(const FitResult &fit,
                                        std::span<const double> phi_grid) {
    const auto factors = OverlapFactors::from_pair(packets_from_lab(fit.lab()));
    std::vector<double> out;
    out.reserve(phi_grid.size());
    for (const double phi : phi_grid) {
        out.push_back(fisher(phi / 4.0, factors).fisher);
    }
    return out;
}

/// Parametric bootstrap: resample every setting from the fitted model with
/// the dataset's shot numbers, refit, and evaluate the Fisher information of
/// each refit. Resample r draws setting i from KeyedRng(seed, i, r + 1).
inline FisherBand mc_fisher_band(const FitResult &fit, const CountsDataset &data,
                                 const FitConfig &config, int n_resamples,
                                 std::span<const double> phi_grid, std::uint64_t seed,
                                 unsigned threads = 1) {
    if (n_resamples < 100) {
        throw std::invalid_argument("at least 100 resamples are required");
    }
    require_increasing(phi_grid, "phi");
    data.validate();
    const auto factors = OverlapFactors::from_pair(packets_from_lab(fit.lab()));
    std::vector<std::array<double, 5>> probabilities;
    probabilities.reserve(data.size());
    for (const double theta : data.theta) {
        probabilities.push_back(observed_probabilities(theta, factors, fit.background));
    }

    FitConfig refit_config = config;
    refit_config.delta_z_um = fit.delta_z_um;
    refit_config.delta_lambda_nm = fit.delta_lambda_nm;
    refit_config.background = std::max(fit.background, 1e-6);

    const auto n = static_cast<std::size_t>(n_resamples);
    std::vector<std::optional<std::vector<double>>> curves(n);
    parallel_for(n, threads, [&](std::size_t r) {
        CountsDataset resample;
        resample.theta = data.theta;
        resample.counts.resize(data.size());
        resample.rng_seed = seed;
        for (std::size_t i = 0; i < data.size(); ++i) {
            KeyedRng rng(seed, i, r + 1);
            resample.counts[i] =
                detail::draw_multinomial(data.shots(i), probabilities[i], rng);
        }
        try {
            curves[r] = fisher_curve(fit_counts(resample, refit_config), phi_grid);
        } catch (const FitNotConverged &) {
            curves[r].reset();
        }
    });

    FisherBand band;
    band.phi.assign(phi_grid.begin(), phi_grid.end());
    band.nominal = fisher_curve(fit, phi_grid);
    band.n_resamples = n_resamples;
    std::vector<const std::vector<double> *> good;
    for (const auto &c : curves) {
        if (c) {
            good.push_back(&*c);
        } else {
            ++band.n_failed;
        }
    }
    if (band.n_failed * 10 > n_resamples) {
        throw FitNotConverged(std::to_string(band.n_failed) + " of " +
                              std::to_string(n_resamples) + " resample fits failed");
    }
    const std::size_t m = phi_grid.size();
    band.mean.assign(m, 0.0);
    band.stddev.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (const auto *c : good) {
            sum += (*c)[j];
        }
        const double mean = sum / static_cast<double>(good.size());
        double ss = 0.0;
        for (const auto *c : good) {
            ss += ((*c)[j] - mean) * ((*c)[j] - mean);
        }
        band.mean[j] = mean;
        band.stddev[j] =
            good.size() > 1 ? std::sqrt(ss / static_cast<double>(good.size() - 1)) : 0.0;
    }
    band.lower.resize(m);
    band.upper.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        band.lower[j] = band.mean[j] - band.stddev[j];
        band.upper[j] = band.mean[j] + band.stddev[j];
    }
    return band;
}

} // namespace hompol
