#pragma once

#include <span>
#include <string>

#include "metaco/problems.hpp"

namespace metaco {

/// Approximation rate found / reference. For maximization larger is better,
/// for minimization smaller is better. Throws on a nonpositive reference.
double apr(double found, double reference, Sense sense);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    std::size_t count = 0;
};

MeanStd mean_std(std::span<const double> values);

/// "0.976 ± 0.048"
std::string format_mean_std(const MeanStd& m, int decimals = 3);

}  // namespace metaco
