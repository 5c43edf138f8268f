#pragma once

// Bound-free Nelder-Mead minimization with restarts (GSL nmsimplex2 under
// the hood). Bounds are handled by the caller through parameter transforms.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "hompol/error.hpp"

namespace hompol::simplex {

struct Options {
    double initial_step = 0.5;
    double size_tolerance = 1e-7;
    /// A restart that lowers the objective by less than this (relative) ends
    /// the search.
    double restart_tolerance = 1e-10;
    int max_iterations_per_run = 5000;
    /// 0 means 10 * dimension.
    int max_restarts = 0;
};

struct Result {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int n_evaluations = 0;
    int n_iterations = 0;
    int n_restarts = 0;
    bool converged = false;
};

using Objective = std::function<double(const std::vector<double> &)>;

namespace detail {

struct Context {
    const Objective *objective;
    std::vector<double> scratch;
    int evaluations = 0;
};

inline double trampoline(const gsl_vector *v, void *params) {
    auto *ctx = static_cast<Context *>(params);
    for (std::size_t i = 0; i < ctx->scratch.size(); ++i) {
        ctx->scratch[i] = gsl_vector_get(v, i);
    }
    ++ctx->evaluations;
    const double f = (*ctx->objective)(ctx->scratch);
    return std::isfinite(f) ? f : std::numeric_limits<double>::max();
}

struct VectorDeleter {
    void operator()(gsl_vector *v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer *m) const { gsl_multimin_fminimizer_free(m); }
};

/// GSL's default handler aborts; errors are reported through return codes.
inline void quiet_gsl() {
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

} // namespace detail

/// Minimizes f from x0. Each run stops when the simplex size drops below
/// size_tolerance; the search restarts from the best point with a fresh
/// simplex until a restart stops improving. `converged` is false if the
/// restart budget runs out first.
inline Result minimize(const Objective &f, std::vector<double> x0,
                       const Options &options = {}) {
    detail::quiet_gsl();
    const std::size_t dim = x0.size();
    if (dim == 0) {
        Result r;
        r.value = f(x0);
        r.n_evaluations = 1;
        r.converged = true;
        return r;
    }
    const int max_restarts =
        options.max_restarts > 0 ? options.max_restarts : 10 * static_cast<int>(dim);

    detail::Context ctx{&f, std::vector<double>(dim), 0};
    gsl_multimin_function fn{&detail::trampoline, dim, &ctx};
    std::unique_ptr<gsl_vector, detail::VectorDeleter> x(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_vector, detail::VectorDeleter> step(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_multimin_fminimizer, detail::MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));

    Result result;
    result.x = x0;
    result.value = f(x0);
    ++ctx.evaluations;

    for (int run = 0; run <= max_restarts; ++run) {
        for (std::size_t i = 0; i < dim; ++i) {
            gsl_vector_set(x.get(), i, result.x[i]);
            gsl_vector_set(step.get(), i, options.initial_step);
        }
        gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
        for (int it = 0; it < options.max_iterations_per_run; ++it) {
            ++result.n_iterations;
            if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
                break;
            }
            const double size = gsl_multimin_fminimizer_size(minimizer.get());
            if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
                break;
            }
        }
        const double value = gsl_multimin_fminimizer_minimum(minimizer.get());
        const double previous = result.value;
        if (value <= previous) {
            result.value = value;
            for (std::size_t i = 0; i < dim; ++i) {
                result.x[i] = gsl_vector_get(gsl_multimin_fminimizer_x(minimizer.get()), i);
            }
        }
        result.n_restarts = run;
        if (run > 0 && previous - value <=
                           options.restart_tolerance * (1.0 + std::abs(previous))) {
            result.converged = true;
            break;
        }
    }
    result.n_evaluations = ctx.evaluations;
    return result;
}

} // namespace hompol::simplex
