#pragma once

#include "demand/types.hpp"

#include <cmath>

namespace demand {

inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double mean(const Eigen::Ref<const Vector>& v) { return v.mean(); }

// Sample standard deviation (n-1 denominator).
inline double sample_sd(const Eigen::Ref<const Vector>& v) {
    const Index n = v.size();
    if (n < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(n - 1));
}

inline double sigmoid(double eta) {
    if (eta >= 0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

}  // namespace demand
