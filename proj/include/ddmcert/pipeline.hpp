#pragma once

// Schwarz iterate -> averaged flux -> corrector -> majorant, on a fixed
// mesh and decomposition.

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ddmcert/flux.hpp"
#include "ddmcert/majorant.hpp"
#include "ddmcert/mesh.hpp"
#include "ddmcert/problem.hpp"
#include "ddmcert/schwarz.hpp"

namespace ddmcert {

enum class EpsPolicy { fixed, optimized };

struct Certificate {
    BrokenFluxField flux;
    CorrectorSolution corrector;
    ConstraintResiduals residuals;
    MajorantReport report;
    double objective_before_improvement = 0.0;
};

/// Relative slack of `bound` over `error`; negative means violated.
inline double guarantee_slack(double bound, double error) {
    return error > 0.0 ? (bound - error) / error : bound;
}

inline bool guarantee_holds(const MajorantReport& r, double rel_tol = 1e-9) {
    if (!r.energy_error) return true;
    return guarantee_slack(r.total, *r.energy_error) >= -rel_tol &&
           guarantee_slack(r.d11_bound, *r.energy_error) >= -rel_tol;
}

class Experiment {
public:
    Experiment(TriMesh mesh, const Layout& layout, EllipticProblem problem)
        : mesh_(std::make_unique<TriMesh>(std::move(mesh))),
          dd_(std::make_unique<DomainDecomposition>(*mesh_, layout)),
          problem_(std::move(problem)),
          constants_(majorant_constants(*mesh_, *dd_, problem_)) {}

    static Experiment lshape(double h) {
        return Experiment(build_structured_mesh(lshape_layout(), h), lshape_layout(), manufactured_lshape_problem());
    }
    static Experiment rect(int m, int n, double h) {
        const Layout l = rect_grid_layout(m, n, CellType::quad);
        return Experiment(build_structured_mesh(l, h), l, manufactured_lshape_problem());
    }

    const TriMesh& mesh() const { return *mesh_; }
    const DomainDecomposition& decomposition() const { return *dd_; }
    const EllipticProblem& problem() const { return problem_; }
    const MajorantConstants& constants() const { return constants_; }

    std::shared_ptr<const CorrectorSpace> space(double coarse_h) {
        const Index key = grid_divisions(coarse_h, "H");
        auto it = spaces_.find(key);
        if (it == spaces_.end()) {
            if (coarse_h < mesh_->h() * (1.0 - 1e-12)) throw std::invalid_argument("Experiment: H must be >= h");
            it = spaces_.emplace(key, build_corrector_space(*mesh_, *dd_, coarse_h)).first;
        }
        return it->second;
    }

    SchwarzSolver schwarz(SchwarzConfig cfg = {}) const { return SchwarzSolver(*mesh_, *dd_, problem_, std::move(cfg)); }

    /// Averaged flux plus the optimal corrector for v. With the optimized
    /// policy the corrector and the weights are alternated a few times.
    Certificate certify(const ScalarFieldP1& v, double coarse_h, EpsPolicy policy = EpsPolicy::fixed,
                        bool improve_locally = false, int alternations = 3) {
        const auto sp = space(coarse_h);
        const BrokenFluxField ytilde = average_gradient(v, *dd_, problem_.a());
        Eps eps{};
        Certificate c;
        const int rounds = policy == EpsPolicy::optimized ? std::max(1, alternations) : 1;
        for (int round = 0; round < rounds; ++round) {
            const CorrectorWeights w = corrector_weights(eps, constants_);
            c.corrector = solve_corrector(ytilde, v, problem_, *sp, w);
            c.flux = corrected_flux(ytilde, sp, c.corrector.coefficients);
            if (improve_locally) {
                c.objective_before_improvement = corrector_objective(c.flux, v, problem_, w);
                if (auto upd = improve_corrector_locally(c.flux, v, problem_, w)) c.flux.add_corrector(std::move(*upd));
            }
            if (policy == EpsPolicy::optimized) {
                const OptimizedEps opt = optimize_eps(flux_terms(c.flux, v, problem_), constants_);
                if (opt.zero_majorant) break;
                eps = opt.eps;
            }
        }
        c.residuals = constraint_residuals(c.flux, problem_.source());
        const FluxTerms terms = flux_terms(c.flux, v, problem_);
        c.report = evaluate_majorant(terms, constants_, eps, c.residuals.normalized());
        if (problem_.has_exact()) {
            c.report.energy_error = energy_error(v, problem_);
            if (*c.report.energy_error > 0.0) c.report.i_eff = c.report.total / *c.report.energy_error;
        }
        return c;
    }

private:
    std::unique_ptr<TriMesh> mesh_;
    std::unique_ptr<DomainDecomposition> dd_;
    EllipticProblem problem_;
    MajorantConstants constants_;
    std::map<Index, std::shared_ptr<const CorrectorSpace>> spaces_;
};

/// One evaluated iterate.
struct HistoryRow {
    double h = 0.0;
    double coarse_h = 0.0;
    int sweep = 0;
    int step = 0;
    MajorantReport report;
};

}  // namespace ddmcert
