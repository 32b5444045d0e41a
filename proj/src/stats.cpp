#include "rotorwalk/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <stdexcept>

namespace rotorwalk {

ChiSquare chi_square_test(const std::vector<std::uint64_t>& observed, const std::vector<double>& probabilities) {
    if (observed.size() != probabilities.size() || observed.size() < 2)
        throw std::invalid_argument("chi-square needs matching category lists of size >= 2");
    std::uint64_t total = 0;
    for (auto o : observed) total += o;
    ChiSquare r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        double e = probabilities[i] * static_cast<double>(total);
        double d = static_cast<double>(observed[i]) - e;
        r.statistic += d * d / e;
    }
    r.dof = static_cast<int>(observed.size()) - 1;
    r.p_value = boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0);
    return r;
}

}  // namespace rotorwalk
