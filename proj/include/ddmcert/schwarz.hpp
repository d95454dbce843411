#pragma once

// Overlapping Schwarz alternating method on a single background mesh. Each
// overlapping subdomain Omega_j is solved as a Dirichlet problem with the
// current global iterate as boundary data, then written back in place.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ddmcert/mesh.hpp"
#include "ddmcert/problem.hpp"

namespace ddmcert {

enum class SchwarzMode { multiplicative, additive };

struct SchwarzConfig {
    SchwarzMode mode = SchwarzMode::multiplicative;
    int sweeps = 16;
    std::vector<int> order;                      ///< empty: 0, 1, ..., M-1
    std::optional<std::vector<double>> initial;  ///< nodal values; default zero inside, u_g on the boundary
    SpdSolveOptions solver{};
};

/// Snapshot of the global iterate. In multiplicative mode one record is
/// taken after every subdomain solve (step = M (sweep - 1) + position);
/// additive sweeps produce one record each.
struct SchwarzRecord {
    int sweep = 0;
    int step = 0;
    int subdomain = -1;  ///< overlapping subdomain solved last, -1 for the initial guess
    std::vector<double> values;
};

struct SchwarzState {
    ScalarFieldP1 iterate;
    int sweep = 0;
    std::vector<SchwarzRecord> steps;   ///< includes step 0 (initial guess)
    std::vector<SchwarzRecord> sweeps;  ///< end-of-sweep iterates, includes sweep 0

    ScalarFieldP1 at_sweep(int n) const { return {*iterate.mesh, sweeps.at(static_cast<std::size_t>(n)).values}; }
    ScalarFieldP1 at_step(int m) const { return {*iterate.mesh, steps.at(static_cast<std::size_t>(m)).values}; }
};

/// Triangles of Omega_j.
inline std::vector<Index> overlap_triangles(const DomainDecomposition& dd, int j) {
    std::vector<Index> out;
    for (int k : dd.overlap(j)) {
        const auto& t = dd.triangles_of(k);
        out.insert(out.end(), t.begin(), t.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Fine edges on the boundary of Omega_j (adjacent to exactly one of its triangles).
inline std::vector<Index> overlap_boundary_edges(const TriMesh& mesh, const DomainDecomposition& dd, int j) {
    std::vector<char> inside(static_cast<std::size_t>(mesh.num_triangles()), 0);
    for (Index t : overlap_triangles(dd, j)) inside[t] = 1;
    std::vector<Index> out;
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        const MeshEdge& me = mesh.edge(e);
        const int a = inside[me.tri[0]];
        const int b = me.tri[1] >= 0 ? inside[me.tri[1]] : 0;
        if (a + b == 1) out.push_back(e);
    }
    return out;
}

/// Nodal values of v on every vertex of the edge set, sorted by vertex.
inline std::vector<std::pair<Index, double>> extract_trace(const ScalarFieldP1& v, std::span<const Index> edges) {
    std::vector<Index> verts;
    for (Index e : edges) {
        verts.push_back(v.mesh->edge(e).v[0]);
        verts.push_back(v.mesh->edge(e).v[1]);
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    std::vector<std::pair<Index, double>> out;
    out.reserve(verts.size());
    for (Index x : verts) out.emplace_back(x, v.values[x]);
    return out;
}

/// Free vertices of the Omega_j Dirichlet problem: vertices of Omega_j not on its boundary.
inline std::vector<Index> overlap_free_vertices(const TriMesh& mesh, const DomainDecomposition& dd, int j) {
    std::vector<char> in(static_cast<std::size_t>(mesh.num_vertices()), 0);
    for (Index t : overlap_triangles(dd, j))
        for (Index v : mesh.triangle(t)) in[v] = 1;
    for (Index e : overlap_boundary_edges(mesh, dd, j)) in[mesh.edge(e).v[0]] = in[mesh.edge(e).v[1]] = 0;
    std::vector<Index> out;
    for (Index v = 0; v < mesh.num_vertices(); ++v)
        if (in[v]) out.push_back(v);
    return out;
}

inline std::vector<double> default_initial_guess(const TriMesh& mesh, const EllipticProblem& problem) {
    std::vector<double> u(static_cast<std::size_t>(mesh.num_vertices()), 0.0);
    for (Index v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.is_boundary_vertex(v)) u[v] = problem.u_g(mesh.vertex(v));
    return u;
}

class SchwarzSolver {
public:
    SchwarzSolver(const TriMesh& mesh, const DomainDecomposition& dd, const EllipticProblem& problem,
                  SchwarzConfig config = {})
        : mesh_(&mesh), config_(std::move(config)), system_(assemble_system(mesh, problem)) {
        const int m = dd.num_overlaps();
        if (config_.sweeps < 1) throw std::invalid_argument("run_schwarz: sweeps must be >= 1");
        if (config_.order.empty()) {
            config_.order.resize(static_cast<std::size_t>(m));
            std::iota(config_.order.begin(), config_.order.end(), 0);
        }
        std::vector<int> sorted = config_.order;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < m; ++i)
            if (static_cast<int>(sorted.size()) != m || sorted[i] != i)
                throw std::invalid_argument("run_schwarz: order must be a permutation of the overlapping subdomains");
        if (!dd.satisfies_overlap_condition())
            throw std::invalid_argument("run_schwarz: decomposition violates the overlap condition");
        if (!dd.overlaps_cover_domain())
            throw std::invalid_argument("run_schwarz: overlapping subdomains do not cover the domain");
        for (int j = 0; j < m; ++j) local_.emplace_back(system_.matrix, overlap_free_vertices(mesh, dd, j), config_.solver);

        state_.iterate = ScalarFieldP1(mesh, config_.initial ? *config_.initial : default_initial_guess(mesh, problem));
        state_.steps.push_back({0, 0, -1, state_.iterate.values});
        state_.sweeps.push_back({0, 0, -1, state_.iterate.values});
    }

    const LinearSystem& system() const { return system_; }
    const SchwarzState& state() const { return state_; }
    const SchwarzConfig& config() const { return config_; }

    /// One sweep over all overlapping subdomains.
    void sweep() {
        const int n = ++state_.sweep;
        const int m = static_cast<int>(config_.order.size());
        if (config_.mode == SchwarzMode::multiplicative) {
            for (int pos = 0; pos < m; ++pos) {
                const int j = config_.order[pos];
                solve_local(j, state_.iterate.values);
                state_.steps.push_back({n, m * (n - 1) + pos + 1, j, state_.iterate.values});
            }
        } else {
            const std::vector<double> base = state_.iterate.values;
            std::vector<std::vector<double>> results(static_cast<std::size_t>(m));
            for (int pos = 0; pos < m; ++pos) {
                results[pos] = base;
                solve_local(config_.order[pos], results[pos]);
            }
            // last writer wins, in subdomain index order
            for (int j = 0; j < m; ++j) {
                const int pos = static_cast<int>(std::find(config_.order.begin(), config_.order.end(), j) -
                                                 config_.order.begin());
                for (Index v : local_[j].free_dofs()) state_.iterate.values[v] = results[pos][v];
            }
            state_.steps.push_back({n, n, -1, state_.iterate.values});
        }
        state_.sweeps.push_back({n, static_cast<int>(state_.steps.back().step), state_.steps.back().subdomain,
                                 state_.iterate.values});
    }

    SchwarzState run() {
        while (state_.sweep < config_.sweeps) sweep();
        return state_;
    }

private:
    void solve_local(int j, std::vector<double>& u) {
        try {
            local_[j].solve(system_.rhs, u);
        } catch (const SolverError& e) {
            throw SolverError("Schwarz sweep " + std::to_string(state_.sweep) + ", subdomain " + std::to_string(j) +
                                  ": " + e.what(),
                              e.residual());
        }
    }

    const TriMesh* mesh_;
    SchwarzConfig config_;
    LinearSystem system_;
    std::vector<ConstrainedSolver> local_;
    SchwarzState state_;
};

inline SchwarzState run_schwarz(const TriMesh& mesh, const DomainDecomposition& dd, const EllipticProblem& problem,
                                SchwarzConfig config = {}) {
    return SchwarzSolver(mesh, dd, problem, std::move(config)).run();
}

struct ContractionEstimate {
    double rho = 0.0;
    std::vector<double> ratios;
    bool hit_floor = false;
};

/// Geometric mean of successive error ratios, stopping once an error drops
/// below `floor_rel` times the first one.
inline ContractionEstimate contraction_estimate(std::span<const double> errors, double floor_rel = 1e-10) {
    if (errors.size() < 3) throw std::invalid_argument("contraction_estimate: need at least 3 recorded errors");
    ContractionEstimate out;
    const double floor = floor_rel * errors[0];
    if (!(errors[0] > 0.0)) {
        out.hit_floor = true;
        return out;
    }
    double log_sum = 0.0;
    for (std::size_t i = 1; i < errors.size(); ++i) {
        if (errors[i] <= floor) {
            out.hit_floor = true;
            break;
        }
        out.ratios.push_back(errors[i] / errors[i - 1]);
        log_sum += std::log(out.ratios.back());
    }
    out.rho = out.ratios.empty() ? 0.0 : std::exp(log_sum / static_cast<double>(out.ratios.size()));
    return out;
}

/// Discrete energy distances ||v_h - v^n||_K of the end-of-sweep iterates.
inline std::vector<double> discrete_sweep_errors(const SchwarzState& s, const CsrMatrix& k, std::span<const double> v_h) {
    std::vector<double> out;
    for (const auto& r : s.sweeps) out.push_back(discrete_energy_distance(k, r.values, v_h));
    return out;
}

}  // namespace ddmcert
