#pragma once

// CSV, markdown and VTK output of majorant histories.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "ddmcert/pipeline.hpp"
#include "ddmcert/vtk.hpp"

namespace ddmcert {

/// Three significant digits with a bare exponent, e.g. 8.28e-2 or 1.46e0.
inline std::string sci3(double x) {
    if (x == 0.0) return "0.00e0";
    if (!std::isfinite(x)) return std::to_string(x);
    int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
    double m = x / std::pow(10.0, e);
    if (std::abs(std::round(m * 100.0)) >= 1000.0) {
        m /= 10.0;
        ++e;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2fe%d", m, e);
    return buf;
}

inline std::string format_ieff(double x) {
    if (std::abs(x) < 10.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", x);
        return buf;
    }
    return sci3(x);
}

inline std::string full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_history_csv(std::ostream& os, const std::vector<HistoryRow>& rows) {
    const std::size_t nsub = rows.empty() ? 0 : rows.front().report.m1_sq.size();
    os << "h,H,sweep,step,M1_sq,M2_sq,M3_sq,Mplus_sq,energy_error,I_eff,eps1,eps2,eps3,D11_bound,guaranteed";
    for (std::size_t k = 0; k < nsub; ++k) os << ",M1_sq_omega" << k + 1;
    for (std::size_t k = 0; k < nsub; ++k) os << ",M2_sq_omega" << k + 1;
    os << "\r\n";
    for (const auto& r : rows) {
        const MajorantReport& m = r.report;
        os << full(r.h) << ',' << full(r.coarse_h) << ',' << r.sweep << ',' << r.step << ',' << full(m.M1_sq) << ','
           << full(m.M2_sq) << ',' << full(m.M3_sq) << ',' << full(m.total_sq) << ','
           << (m.energy_error ? full(*m.energy_error) : "") << ',' << (m.i_eff ? full(*m.i_eff) : "") << ','
           << full(m.eps.e1) << ',' << full(m.eps.e2) << ',' << full(m.eps.e3) << ',' << full(m.d11_bound) << ','
           << (m.guaranteed ? 1 : 0);
        for (double x : m.m1_sq) os << ',' << full(x);
        for (double x : m.m2_sq) os << ',' << full(x);
        os << "\r\n";
    }
}

enum class TableLayout { by_h, by_coarse_h, by_step, by_sweep, per_subdomain };

inline void write_table_md(std::ostream& os, const std::vector<HistoryRow>& rows, TableLayout layout,
                           const std::string& caption = {}) {
    if (!caption.empty()) os << caption << "\n\n";
    auto frac = [](double x) {
        const double inv = 1.0 / x;
        if (std::abs(inv - std::round(inv)) < 1e-9 && inv >= 1.0)
            return std::round(inv) == 1.0 ? std::string("1") : "1/" + std::to_string(static_cast<long>(std::round(inv)));
        return full(x);
    };
    if (layout == TableLayout::per_subdomain) {
        const std::size_t nsub = rows.empty() ? 0 : rows.front().report.m1_sq.size();
        os << "| n |";
        for (std::size_t k = 0; k < nsub; ++k) os << " M1^2 omega" << k + 1 << " |";
        for (std::size_t k = 0; k < nsub; ++k) os << " M2^2 omega" << k + 1 << " |";
        os << "\n|---|";
        for (std::size_t k = 0; k < 2 * nsub; ++k) os << "---|";
        os << '\n';
        for (const auto& r : rows) {
            os << "| " << r.step << " |";
            for (double x : r.report.m1_sq) os << ' ' << sci3(x) << " |";
            for (double x : r.report.m2_sq) os << ' ' << sci3(x) << " |";
            os << '\n';
        }
        return;
    }
    const char* head = layout == TableLayout::by_h           ? "h"
                       : layout == TableLayout::by_coarse_h ? "H"
                       : layout == TableLayout::by_sweep    ? "sweep"
                                                            : "n";
    os << "| " << head << " | M1^2 | M2^2 | M3^2 | M+^2 | I_eff |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        const MajorantReport& m = r.report;
        const std::string key = layout == TableLayout::by_h         ? frac(r.h)
                                : layout == TableLayout::by_coarse_h ? frac(r.coarse_h)
                                : layout == TableLayout::by_sweep    ? std::to_string(r.sweep)
                                                                     : std::to_string(r.step);
        os << "| " << key << " | " << sci3(m.M1_sq) << " | " << sci3(m.M2_sq) << " | " << sci3(m.M3_sq) << " | "
           << sci3(m.total_sq) << " | " << (m.i_eff ? format_ieff(*m.i_eff) : "-") << " |\n";
    }
}

/// Iterate, exact solution, subdomain labels, flux and local residual per cell.
inline void write_fields_vtk(const std::string& path, const Experiment& ex, const ScalarFieldP1& v,
                             const BrokenFluxField& y) {
    const TriMesh& mesh = ex.mesh();
    std::vector<double> exact;
    if (ex.problem().has_exact())
        for (const Point& p : mesh.vertices()) exact.push_back(ex.problem().exact().u(p));
    std::vector<double> label, residual;
    for (Index t = 0; t < mesh.num_triangles(); ++t) {
        label.push_back(ex.decomposition().subdomain_of(t));
        residual.push_back(y.divergence(t) + ex.problem().f(mesh.centroid(t)));
    }
    const std::vector<Vec2> flux = y.centroid_values();
    std::vector<vtk::PointScalars> pd{{"v", v.values}};
    if (!exact.empty()) pd.push_back({"u_exact", exact});
    const std::vector<vtk::CellScalars> cs{{"subdomain", label}, {"div_y_plus_f", residual}};
    const std::vector<vtk::CellVectors> cv{{"y", flux}};
    vtk::write_file(path, mesh, pd, cs, cv);
}

}  // namespace ddmcert
