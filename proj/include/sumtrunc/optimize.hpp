#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

// Derivative-free simplex (Nelder-Mead) minimizer with the standard
// reflection/expansion/contraction/shrink coefficients.  NaN objective values
// are treated as +infinity so the simplex walks away from invalid regions.
namespace sumtrunc {

struct NelderMeadOptions {
    double initial_step = 0.5;  // added to each coordinate to form the simplex
    double f_tolerance = 1e-12;
    double x_tolerance = 1e-10;
    std::uint64_t max_evaluations = 4000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f_min = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t n_evaluations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> start, const NelderMeadOptions& options = {}) {
    if (!objective) throw std::invalid_argument("nelder_mead_minimize: no objective");
    if (start.empty()) throw std::invalid_argument("nelder_mead_minimize: empty start point");
    const std::size_t dim = start.size();

    NelderMeadResult result;
    const auto eval = [&](const std::vector<double>& x) {
        ++result.n_evaluations;
        const double f = objective(x);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    };

    std::vector<std::vector<double>> simplex(dim + 1, start);
    std::vector<double> f_values(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += options.initial_step;
    for (std::size_t i = 0; i <= dim; ++i) f_values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), candidate(dim);

    while (result.n_evaluations < options.max_evaluations) {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return f_values[a] < f_values[b]; });
        const std::size_t best = order.front(), worst = order.back();
        const std::size_t second_worst = order[dim - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            spread = std::max(spread,
                              std::abs(simplex[worst][i] - simplex[best][i]));
        }
        if (std::abs(f_values[worst] - f_values[best])
                <= options.f_tolerance * (std::abs(f_values[best]) + options.f_tolerance)
            && spread <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
        }
        for (std::size_t d = 0; d < dim; ++d) centroid[d] /= static_cast<double>(dim);

        const auto blend = [&](double coef) {
            for (std::size_t d = 0; d < dim; ++d) {
                candidate[d] = centroid[d] + coef * (simplex[worst][d] - centroid[d]);
            }
        };

        blend(-1.0);  // reflection
        const std::vector<double> reflected = candidate;
        const double f_reflected = eval(reflected);
        if (f_reflected < f_values[order[0]]) {
            blend(-2.0);  // expansion
            const double f_expanded = eval(candidate);
            if (f_expanded < f_reflected) {
                simplex[worst] = candidate;
                f_values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                f_values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < f_values[second_worst]) {
            simplex[worst] = reflected;
            f_values[worst] = f_reflected;
            continue;
        }
        blend(f_reflected < f_values[worst] ? -0.5 : 0.5);  // contraction
        const double f_contracted = eval(candidate);
        if (f_contracted < std::min(f_reflected, f_values[worst])) {
            simplex[worst] = candidate;
            f_values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {  // shrink toward the best point
            if (i == best) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
            }
            f_values[i] = eval(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
        if (f_values[i] < f_values[best]) best = i;
    }
    result.x = simplex[best];
    result.f_min = f_values[best];
    return result;
}

}  // namespace sumtrunc
