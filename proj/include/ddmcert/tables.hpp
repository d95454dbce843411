#pragma once

// Experiment drivers for the L-shape tables.

#include <algorithm>
#include <vector>

#include "ddmcert/pipeline.hpp"

namespace ddmcert {

struct TableOptions {
    EpsPolicy eps = EpsPolicy::fixed;
    SchwarzMode mode = SchwarzMode::multiplicative;
};

inline HistoryRow make_row(Experiment& ex, const ScalarFieldP1& v, double coarse_h, int sweep, int step,
                           const TableOptions& opt) {
    return {ex.mesh().h(), coarse_h, sweep, step, ex.certify(v, coarse_h, opt.eps).report};
}

/// H = h for every h, evaluated after `sweeps` sweeps.
inline std::vector<HistoryRow> table_by_h(const std::vector<double>& hs, int sweeps, const TableOptions& opt = {}) {
    std::vector<HistoryRow> rows;
    for (double h : hs) {
        Experiment ex = Experiment::lshape(h);
        const SchwarzState s = ex.schwarz({opt.mode, sweeps}).run();
        rows.push_back(make_row(ex, s.at_sweep(sweeps), h, sweeps, s.sweeps.back().step, opt));
    }
    return rows;
}

/// Fixed fine h, corrector on each coarse H, evaluated after `sweeps` sweeps.
inline std::vector<HistoryRow> table_by_coarse_h(double h, const std::vector<double>& coarse_hs, int sweeps,
                                                 const TableOptions& opt = {}) {
    Experiment ex = Experiment::lshape(h);
    const SchwarzState s = ex.schwarz({opt.mode, sweeps}).run();
    const ScalarFieldP1 v = s.at_sweep(sweeps);
    std::vector<HistoryRow> rows;
    for (double H : coarse_hs) rows.push_back(make_row(ex, v, H, sweeps, s.sweeps.back().step, opt));
    return rows;
}

/// H = h, evaluated after the given numbers of subdomain solves.
inline std::vector<HistoryRow> table_by_step(double h, const std::vector<int>& steps, const TableOptions& opt = {}) {
    Experiment ex = Experiment::lshape(h);
    const int m = ex.decomposition().num_overlaps();
    const int last = *std::max_element(steps.begin(), steps.end());
    const int sweeps = opt.mode == SchwarzMode::multiplicative ? (last + m - 1) / m : last;
    const SchwarzState s = ex.schwarz({opt.mode, sweeps}).run();
    std::vector<HistoryRow> rows;
    for (int step : steps) {
        const auto& rec = s.steps.at(static_cast<std::size_t>(step));
        rows.push_back(make_row(ex, s.at_step(step), h, rec.sweep, step, opt));
    }
    return rows;
}

inline const std::vector<double>& table1_hs() {
    static const std::vector<double> v{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    return v;
}
inline const std::vector<double>& table2_coarse_hs() {
    static const std::vector<double> v{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
    return v;
}
inline const std::vector<int>& table3_steps() {
    static const std::vector<int> v{2, 4, 6, 8};
    return v;
}
inline const std::vector<int>& table4_steps() {
    static const std::vector<int> v{2, 3, 4, 7, 8};
    return v;
}

}  // namespace ddmcert
