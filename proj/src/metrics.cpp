#include "metaco/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace metaco {

double apr(double found, double reference, Sense) {
    if (!(reference > 0.0)) throw std::invalid_argument("approximation rate needs a positive reference");
    return found / reference;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    out.count = values.size();
    if (values.empty()) return out;
    double s = 0.0;
    for (double v : values) s += v;
    out.mean = s / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    return out;
}

std::string format_mean_std(const MeanStd& m, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, m.mean, decimals, m.stddev);
    return buf;
}

}  // namespace metaco
