#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace rotorwalk {

// Welford running mean and variance.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    double stderr_() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

private:
    std::uint64_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

struct ChiSquare {
    double statistic = 0;
    int dof = 0;
    double p_value = 1;
};

// Goodness of fit of category counts against expected probabilities.
ChiSquare chi_square_test(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities);

}  // namespace rotorwalk
