#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rotorwalk/graph.hpp"

namespace rotorwalk {

using Rational = boost::multiprecision::cpp_rational;

enum class Arithmetic { Float, Exact };

// Expected visits to each vertex by simple random walk from `start` before
// it hits the sink.
struct GreenTable {
    VertexId start = 0;
    std::vector<double> value;
    std::vector<double> stderr_;  // Monte Carlo only
    std::vector<Rational> exact;  // Exact arithmetic only
    std::uint64_t samples = 0;    // Monte Carlo only
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solves deg(x) F(x) - sum_{y ~ x, y not in Z} F(y) = 1{x = start} on V \ Z
// and returns G = deg * F. Dense LU up to kDenseLimit unknowns, conjugate
// gradients above.
inline constexpr std::size_t kDenseLimit = 3000;

GreenTable green_exact(const Graph& g, const SinkSet& sink, VertexId start, Arithmetic mode = Arithmetic::Float);

// Largest |ΔF(x) + 1{x = start}/deg(x)| over V \ Z, with F = G / deg.
double green_residual(const Graph& g, const SinkSet& sink, const GreenTable& table);
bool green_residual_exact_zero(const Graph& g, const SinkSet& sink, const GreenTable& table);

GreenTable green_mc(const Graph& g, const SinkSet& sink, VertexId start, std::uint64_t walks, std::uint64_t seed,
                    int threads = 1);

// `vertex,G[,stderr]`; exact tables print G as a fraction.
void write_green_csv(std::ostream& os, const Graph& g, const GreenTable& table);

}  // namespace rotorwalk
