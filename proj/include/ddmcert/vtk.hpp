#pragma once

// Legacy ASCII VTK (version 2.0) unstructured-grid output.

#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ddmcert/mesh.hpp"

namespace ddmcert::vtk {

struct PointScalars {
    std::string name;
    std::span<const double> values;
};

struct CellVectors {
    std::string name;
    std::span<const Vec2> values;
};

struct CellScalars {
    std::string name;
    std::span<const double> values;
};

inline void write(std::ostream& os, const TriMesh& mesh, std::span<const PointScalars> point_data = {},
                  std::span<const CellScalars> cell_scalars = {}, std::span<const CellVectors> cell_vectors = {},
                  const std::string& title = "ddmcert") {
    os << "# vtk DataFile Version 2.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(17);
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Point& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
    os << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.num_triangles() << '\n';
    for (Index t = 0; t < mesh.num_triangles(); ++t) os << "5\n";

    if (!point_data.empty()) {
        os << "POINT_DATA " << mesh.num_vertices() << '\n';
        for (const auto& f : point_data) {
            if (static_cast<Index>(f.values.size()) != mesh.num_vertices())
                throw std::invalid_argument("vtk::write: point field '" + f.name + "' has wrong length");
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) os << v << '\n';
        }
    }
    if (!cell_scalars.empty() || !cell_vectors.empty()) {
        os << "CELL_DATA " << mesh.num_triangles() << '\n';
        for (const auto& f : cell_scalars) {
            if (static_cast<Index>(f.values.size()) != mesh.num_triangles())
                throw std::invalid_argument("vtk::write: cell field '" + f.name + "' has wrong length");
            os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) os << v << '\n';
        }
        for (const auto& f : cell_vectors) {
            if (static_cast<Index>(f.values.size()) != mesh.num_triangles())
                throw std::invalid_argument("vtk::write: cell field '" + f.name + "' has wrong length");
            os << "VECTORS " << f.name << " double\n";
            for (const Vec2& v : f.values) os << v.x << ' ' << v.y << " 0\n";
        }
    }
}

inline void write_file(const std::string& path, const TriMesh& mesh, std::span<const PointScalars> point_data = {},
                       std::span<const CellScalars> cell_scalars = {}, std::span<const CellVectors> cell_vectors = {}) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("vtk::write_file: cannot open " + path);
    write(os, mesh, point_data, cell_scalars, cell_vectors);
}

}  // namespace ddmcert::vtk
