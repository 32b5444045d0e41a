#include "rotorwalk/green.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <cmath>
#include <iomanip>
#include <ostream>

#include "rotorwalk/parallel.hpp"
#include "rotorwalk/rng.hpp"

namespace rotorwalk {

using boost::multiprecision::cpp_int;

namespace {

struct Unknowns {
    std::vector<std::int64_t> index;  // vertex -> unknown or -1
    std::vector<VertexId> vertex;     // unknown -> vertex
};

Unknowns number_unknowns(const Graph& g, const SinkSet& sink) {
    Unknowns u;
    u.index.assign(g.vertex_count(), -1);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        if (sink.contains(static_cast<VertexId>(v))) continue;
        u.index[v] = static_cast<std::int64_t>(u.vertex.size());
        u.vertex.push_back(static_cast<VertexId>(v));
    }
    return u;
}

std::vector<double> solve_float(const Graph& g, const Unknowns& u, VertexId start) {
    const auto m = static_cast<Eigen::Index>(u.vertex.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    rhs[u.index[start]] = 1.0;
    Eigen::VectorXd f;
    if (u.vertex.size() <= kDenseLimit) {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            VertexId x = u.vertex[i];
            L(i, i) = static_cast<double>(g.degree(x));
            for (VertexId y : g.neighbors(x))
                if (u.index[y] >= 0) L(i, u.index[y]) -= 1.0;
        }
        f = L.partialPivLu().solve(rhs);
    } else {
        std::vector<Eigen::Triplet<double>> entries;
        entries.reserve(u.vertex.size() + g.directed_edge_count());
        for (Eigen::Index i = 0; i < m; ++i) {
            VertexId x = u.vertex[i];
            entries.emplace_back(i, i, static_cast<double>(g.degree(x)));
            for (VertexId y : g.neighbors(x))
                if (u.index[y] >= 0) entries.emplace_back(i, u.index[y], -1.0);
        }
        Eigen::SparseMatrix<double> L(m, m);
        L.setFromTriplets(entries.begin(), entries.end());
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-12);
        cg.setMaxIterations(std::max<Eigen::Index>(10 * m, 1000));
        cg.compute(L);
        f = cg.solve(rhs);
        if (cg.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge");
    }
    std::vector<double> out(u.vertex.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[static_cast<Eigen::Index>(i)];
    return out;
}

std::vector<Rational> solve_exact(const Graph& g, const Unknowns& u, VertexId start) {
    const std::size_t m = u.vertex.size();
    // Augmented integer system, last column is the right-hand side.
    std::vector<std::vector<cpp_int>> a(m, std::vector<cpp_int>(m + 1, 0));
    for (std::size_t i = 0; i < m; ++i) {
        VertexId x = u.vertex[i];
        a[i][i] = static_cast<long long>(g.degree(x));
        for (VertexId y : g.neighbors(x))
            if (u.index[y] >= 0) a[i][static_cast<std::size_t>(u.index[y])] -= 1;
    }
    a[static_cast<std::size_t>(u.index[start])][m] = 1;

    cpp_int prev = 1;
    for (std::size_t k = 0; k < m; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < m && a[p][k] == 0) ++p;
            if (p == m) throw SolverError("singular Dirichlet system");
            std::swap(a[k], a[p]);
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            for (std::size_t j = k + 1; j <= m; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    std::vector<Rational> f(m);
    for (std::size_t i = m; i-- > 0;) {
        Rational s = Rational(a[i][m]);
        for (std::size_t j = i + 1; j < m; ++j) s -= Rational(a[i][j]) * f[j];
        f[i] = s / Rational(a[i][i]);
    }
    return f;
}

}  // namespace

GreenTable green_exact(const Graph& g, const SinkSet& sink, VertexId start, Arithmetic mode) {
    if (sink.empty()) throw SolverError("Green function needs a nonempty sink");
    GreenTable t;
    t.start = start;
    const std::size_t n = g.vertex_count();
    t.value.assign(n, 0.0);
    if (mode == Arithmetic::Exact) t.exact.assign(n, Rational(0));
    if (sink.contains(start)) return t;

    Unknowns u = number_unknowns(g, sink);
    if (mode == Arithmetic::Exact) {
        auto f = solve_exact(g, u, start);
        for (std::size_t i = 0; i < f.size(); ++i) {
            VertexId x = u.vertex[i];
            t.exact[x] = f[i] * static_cast<long long>(g.degree(x));
            t.value[x] = static_cast<double>(t.exact[x]);
        }
    } else {
        auto f = solve_float(g, u, start);
        for (std::size_t i = 0; i < f.size(); ++i) {
            VertexId x = u.vertex[i];
            t.value[x] = f[i] * static_cast<double>(g.degree(x));
        }
    }
    return t;
}

double green_residual(const Graph& g, const SinkSet& sink, const GreenTable& table) {
    double worst = 0;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto x = static_cast<VertexId>(v);
        if (sink.contains(x)) continue;
        double s = table.value[x];  // deg(x) F(x)
        for (VertexId y : g.neighbors(x))
            if (!sink.contains(y)) s -= table.value[y] / static_cast<double>(g.degree(y));
        s -= x == table.start ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

bool green_residual_exact_zero(const Graph& g, const SinkSet& sink, const GreenTable& table) {
    if (table.exact.size() != g.vertex_count()) return false;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto x = static_cast<VertexId>(v);
        if (sink.contains(x)) {
            if (table.exact[x] != 0) return false;
            continue;
        }
        Rational s = table.exact[x];
        for (VertexId y : g.neighbors(x))
            if (!sink.contains(y)) s -= table.exact[y] / static_cast<long long>(g.degree(y));
        if (x == table.start) s -= 1;
        if (s != 0) return false;
    }
    return true;
}

GreenTable green_mc(const Graph& g, const SinkSet& sink, VertexId start, std::uint64_t walks, std::uint64_t seed,
                    int threads) {
    if (sink.empty()) throw SolverError("Monte Carlo Green function needs a nonempty sink");
    if (walks == 0) throw SolverError("walk count must be positive");
    const std::size_t n = g.vertex_count();
    // Fixed chunking keeps the result independent of the thread count.
    const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(walks, 64));
    std::vector<std::vector<std::uint64_t>> sum(chunks), sumsq(chunks);
    for_each_replica(chunks, threads, [&](std::size_t c) {
        Rng rng = make_stream(seed, c);
        sum[c].assign(n, 0);
        sumsq[c].assign(n, 0);
        std::vector<std::uint64_t> count(n, 0);
        std::vector<VertexId> touched;
        const std::uint64_t lo = walks * c / chunks, hi = walks * (c + 1) / chunks;
        for (std::uint64_t w = lo; w < hi; ++w) {
            VertexId x = start;
            while (!sink.contains(x)) {
                if (count[x]++ == 0) touched.push_back(x);
                x = g.neighbor(x, uniform_index(rng, g.degree(x)));
            }
            for (VertexId v : touched) {
                sum[c][v] += count[v];
                sumsq[c][v] += count[v] * count[v];
                count[v] = 0;
            }
            touched.clear();
        }
    });
    GreenTable t;
    t.start = start;
    t.samples = walks;
    t.value.assign(n, 0.0);
    t.stderr_.assign(n, 0.0);
    const auto N = static_cast<double>(walks);
    for (std::size_t v = 0; v < n; ++v) {
        std::uint64_t s = 0, s2 = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sum[c][v];
            s2 += sumsq[c][v];
        }
        double mean = static_cast<double>(s) / N;
        t.value[v] = mean;
        if (walks > 1) {
            double var = (static_cast<double>(s2) - N * mean * mean) / (N - 1);
            t.stderr_[v] = std::sqrt(std::max(var, 0.0) / N);
        }
    }
    return t;
}

void write_green_csv(std::ostream& os, const Graph& g, const GreenTable& table) {
    const bool mc = !table.stderr_.empty();
    os << (mc ? "vertex,G,stderr\n" : "vertex,G\n");
    auto old = os.precision(17);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        auto x = static_cast<VertexId>(v);
        os << g.label(x) << ',';
        if (!table.exact.empty())
            os << table.exact[v];
        else
            os << table.value[v];
        if (mc) os << ',' << table.stderr_[v];
        os << '\n';
    }
    os.precision(old);
}

}  // namespace rotorwalk
