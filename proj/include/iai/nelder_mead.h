#pragma once

#include <functional>
#include <span>
#include <vector>

namespace iai::optim {

struct NelderMeadOptions {
    double initial_step = 0.5;   // per-coordinate offset of the starting simplex
    double f_tolerance = 1e-8;   // stop once max f - min f over the simplex falls below this
    int max_iterations = 500;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

// Unconstrained downhill simplex minimization. Non-finite objective values
// are treated as +infinity, so callers can reject points by returning NaN.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace iai::optim
