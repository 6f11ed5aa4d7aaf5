#include "iai/nelder_mead.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace iai::optim {

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    auto point = [&](std::vector<double>& out, double t, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
    };

    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        if (std::isfinite(fx[worst]) && fx[worst] - fx[best] < options.f_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[k]][j];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        point(trial, -1.0, simplex[worst]);  // reflection
        const double fr = eval(trial);
        if (fr < fx[best]) {
            point(trial2, -2.0, simplex[worst]);  // expansion
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                fx[worst] = fe;
            } else {
                simplex[worst] = trial;
                fx[worst] = fr;
            }
        } else if (fr < fx[second]) {
            simplex[worst] = trial;
            fx[worst] = fr;
        } else {
            const bool outside = fr < fx[worst];
            point(trial2, outside ? -0.5 : 0.5, simplex[worst]);  // contraction
            const double fc = eval(trial2);
            if (fc < (outside ? fr : fx[worst])) {
                simplex[worst] = trial2;
                fx[worst] = fc;
            } else {
                for (std::size_t k = 1; k <= n; ++k) {  // shrink toward the best vertex
                    auto& v = simplex[order[k]];
                    for (std::size_t j = 0; j < n; ++j) v[j] = simplex[best][j] + 0.5 * (v[j] - simplex[best][j]);
                    fx[order[k]] = eval(v);
                }
            }
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    result.x = simplex[best];
    result.f = fx[best];
    result.iterations = iter;
    return result;
}

}  // namespace iai::optim
