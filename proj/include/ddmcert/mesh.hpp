#pragma once

// Structured criss-cross triangulations of rectilinear domains built from
// unit-square cells, their basic/overlapping subdomain decomposition, and the
// coarse polygonal meshes that carry flux correctors.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ddmcert/core.hpp"

namespace ddmcert {

/// Location of a triangle in the structured grid: the grid square (gx, gy)
/// and which half of it (the diagonal runs lower-left to upper-right).
struct GridKey {
    Index gx = 0;
    Index gy = 0;
    bool upper = false;

    friend auto operator<=>(const GridKey& a, const GridKey& b) {
        return std::tie(a.gy, a.gx, a.upper) <=> std::tie(b.gy, b.gx, b.upper);
    }
    friend bool operator==(const GridKey&, const GridKey&) = default;
};

struct MeshEdge {
    std::array<Index, 2> v{};
    std::array<Index, 2> tri{-1, -1};  ///< tri[1] < 0 on the boundary

    bool on_boundary() const { return tri[1] < 0; }
};

/// Returns n with n * h == 1, or throws when 1/h is not a positive integer.
inline Index grid_divisions(double h, const char* what = "h") {
    if (!(h > 0.0) || h > 1.0 + 1e-12) throw std::invalid_argument(std::string(what) + " must lie in (0, 1]");
    const double inv = 1.0 / h;
    const Index n = static_cast<Index>(std::llround(inv));
    if (n < 1 || std::abs(inv - static_cast<double>(n)) > 1e-9 * inv)
        throw std::invalid_argument(std::string("1/") + what + " must be a positive integer");
    return n;
}

class TriMesh {
public:
    TriMesh() = default;

    /// Builds edge adjacency from counter-clockwise triangles. Rejects
    /// degenerate or clockwise triangles and non-manifold edges.
    TriMesh(std::vector<Point> vertices, std::vector<std::array<Index, 3>> triangles, double h,
            std::vector<GridKey> keys = {})
        : vertices_(std::move(vertices)), triangles_(std::move(triangles)), keys_(std::move(keys)), h_(h) {
        std::map<std::pair<Index, Index>, Index> lookup;
        triangle_edges_.resize(triangles_.size());
        areas_.resize(triangles_.size());
        for (Index t = 0; t < num_triangles(); ++t) {
            const auto c = corners(t);
            const double a2 = cross(c[1] - c[0], c[2] - c[0]);
            if (!(a2 > 0.0))
                throw std::invalid_argument("TriMesh: triangle " + std::to_string(t) + " has non-positive area");
            areas_[t] = 0.5 * a2;
            for (int i = 0; i < 3; ++i) {
                Index a = triangles_[t][(i + 1) % 3], b = triangles_[t][(i + 2) % 3];
                if (a > b) std::swap(a, b);
                auto [it, fresh] = lookup.try_emplace({a, b}, static_cast<Index>(edges_.size()));
                if (fresh) {
                    edges_.push_back({{a, b}, {t, -1}});
                } else {
                    MeshEdge& e = edges_[it->second];
                    if (e.tri[1] >= 0) throw std::invalid_argument("TriMesh: edge shared by more than two triangles");
                    e.tri[1] = t;
                }
                triangle_edges_[t][i] = it->second;
            }
        }
        boundary_vertex_.assign(vertices_.size(), false);
        for (const MeshEdge& e : edges_)
            if (e.on_boundary()) boundary_vertex_[e.v[0]] = boundary_vertex_[e.v[1]] = true;
    }

    Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
    Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
    Index num_edges() const { return static_cast<Index>(edges_.size()); }
    double h() const { return h_; }

    const std::vector<Point>& vertices() const { return vertices_; }
    const Point& vertex(Index v) const { return vertices_[v]; }
    const std::array<Index, 3>& triangle(Index t) const { return triangles_[t]; }
    const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
    const MeshEdge& edge(Index e) const { return edges_[e]; }
    const std::vector<MeshEdge>& edges() const { return edges_; }
    /// Edge opposite local vertex i of triangle t.
    Index triangle_edge(Index t, int i) const { return triangle_edges_[t][i]; }
    bool is_boundary_edge(Index e) const { return edges_[e].on_boundary(); }
    bool is_boundary_vertex(Index v) const { return boundary_vertex_[v]; }
    double area(Index t) const { return areas_[t]; }
    double edge_length(Index e) const { return norm(vertices_[edges_[e].v[1]] - vertices_[edges_[e].v[0]]); }
    Point edge_midpoint(Index e) const { return 0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]); }

    std::array<Point, 3> corners(Index t) const {
        const auto& tri = triangles_[t];
        return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
    }
    Point centroid(Index t) const {
        const auto c = corners(t);
        return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
    }

    bool has_grid_keys() const { return !keys_.empty(); }
    const GridKey& grid_key(Index t) const { return keys_[t]; }
    /// Triangle with the given grid key, or -1. Requires a structured mesh.
    Index find(const GridKey& k) const {
        const auto it = std::lower_bound(keys_.begin(), keys_.end(), k);
        return (it != keys_.end() && *it == k) ? static_cast<Index>(it - keys_.begin()) : -1;
    }

    /// V - E + T; equals 1 for a simply connected triangulated region.
    Index euler_characteristic() const { return num_vertices() - num_edges() + num_triangles(); }

private:
    std::vector<Point> vertices_;
    std::vector<std::array<Index, 3>> triangles_;
    std::vector<GridKey> keys_;
    std::vector<MeshEdge> edges_;
    std::vector<std::array<Index, 3>> triangle_edges_;
    std::vector<double> areas_;
    std::vector<bool> boundary_vertex_;
    double h_ = 0.0;
};

/// A unit square [ix, ix+1] x [iy, iy+1] of a rectilinear layout. A whole
/// cell is one basic subdomain when `lower == upper`; otherwise the diagonal
/// from its lower-left to upper-right corner separates two basic subdomains.
struct LayoutCell {
    int ix = 0;
    int iy = 0;
    int lower = 0;
    int upper = 0;

    bool split() const { return lower != upper; }
};

struct Layout {
    std::vector<LayoutCell> cells;
    int num_subdomains = 0;
    /// Index sets I_j of the overlapping subdomains.
    std::vector<std::vector<int>> overlaps;

    const LayoutCell* cell_at(const Point& p) const {
        const int ix = static_cast<int>(std::floor(p.x)), iy = static_cast<int>(std::floor(p.y));
        for (const auto& c : cells)
            if (c.ix == ix && c.iy == iy) return &c;
        return nullptr;
    }
    /// Basic subdomain containing an interior point (not on a diagonal).
    int subdomain_at(const Point& p) const {
        const LayoutCell* c = cell_at(p);
        if (!c) throw std::out_of_range("Layout::subdomain_at: point outside the domain");
        return (p.x - c->ix) > (p.y - c->iy) ? c->lower : c->upper;
    }
    /// Outline polygon (counter-clockwise) of basic subdomain k.
    std::vector<Point> outline(int k) const {
        for (const auto& c : cells) {
            const Point p00{double(c.ix), double(c.iy)}, p10{c.ix + 1.0, double(c.iy)},
                p11{c.ix + 1.0, c.iy + 1.0}, p01{double(c.ix), c.iy + 1.0};
            if (!c.split() && c.lower == k) return {p00, p10, p11, p01};
            if (c.split() && c.lower == k) return {p00, p10, p11};
            if (c.split() && c.upper == k) return {p00, p11, p01};
        }
        throw std::out_of_range("Layout::outline: unknown subdomain");
    }
};

/// Criss-cross triangulation of the layout with spacing h: every h x h square
/// is cut by its lower-left/upper-right diagonal.
inline TriMesh build_structured_mesh(const Layout& layout, double h) {
    const Index n = grid_divisions(h);
    std::set<std::pair<Index, Index>> squares;  // (gy, gx)
    for (const auto& c : layout.cells)
        for (Index b = 0; b < n; ++b)
            for (Index a = 0; a < n; ++a) squares.insert({c.iy * n + b, c.ix * n + a});

    std::vector<std::pair<Index, Index>> corner_keys;
    for (const auto& [gy, gx] : squares)
        for (Index dy = 0; dy < 2; ++dy)
            for (Index dx = 0; dx < 2; ++dx) corner_keys.push_back({gy + dy, gx + dx});
    std::sort(corner_keys.begin(), corner_keys.end());
    corner_keys.erase(std::unique(corner_keys.begin(), corner_keys.end()), corner_keys.end());
    auto vid = [&](Index gx, Index gy) {
        return static_cast<Index>(std::lower_bound(corner_keys.begin(), corner_keys.end(), std::make_pair(gy, gx)) -
                                   corner_keys.begin());
    };
    std::vector<Point> verts;
    verts.reserve(corner_keys.size());
    for (const auto& [gy, gx] : corner_keys) verts.push_back({double(gx) / double(n), double(gy) / double(n)});

    std::vector<std::array<Index, 3>> tris;
    std::vector<GridKey> keys;
    for (const auto& [gy, gx] : squares) {
        const Index p00 = vid(gx, gy), p10 = vid(gx + 1, gy), p11 = vid(gx + 1, gy + 1), p01 = vid(gx, gy + 1);
        tris.push_back({p00, p10, p11});
        keys.push_back({gx, gy, false});
        tris.push_back({p00, p11, p01});
        keys.push_back({gx, gy, true});
    }
    return TriMesh(std::move(verts), std::move(tris), h, std::move(keys));
}

/// Shared boundary gamma_kj of two basic subdomains, k < j.
struct Interface {
    int k = 0;
    int j = 0;
    std::vector<Index> edges;      ///< fine edges ordered by midpoint (x, then y)
    std::vector<Index> tri_k;      ///< adjacent triangle on the omega_k side, per edge
    std::vector<Index> tri_j;      ///< adjacent triangle on the omega_j side, per edge
    Vec2 normal;                   ///< unit normal pointing from omega_k into omega_j
    double length = 0.0;
};

class DomainDecomposition {
public:
    DomainDecomposition() = default;

    DomainDecomposition(const TriMesh& mesh, const Layout& layout) : layout_(layout) {
        const int nsub = layout.num_subdomains;
        if (nsub < 1) throw std::invalid_argument("DomainDecomposition: no basic subdomains");
        tri_sub_.resize(static_cast<std::size_t>(mesh.num_triangles()));
        sub_tris_.assign(static_cast<std::size_t>(nsub), {});
        for (Index t = 0; t < mesh.num_triangles(); ++t) {
            const int k = layout.subdomain_at(mesh.centroid(t));
            if (k < 0 || k >= nsub) throw std::invalid_argument("DomainDecomposition: subdomain label out of range");
            tri_sub_[t] = k;
            sub_tris_[k].push_back(t);
        }
        for (int k = 0; k < nsub; ++k)
            if (sub_tris_[k].empty())
                throw std::invalid_argument("DomainDecomposition: empty basic subdomain " + std::to_string(k));

        // subdomain-local vertex numbering
        sub_verts_.assign(static_cast<std::size_t>(nsub), {});
        local_corner_.resize(static_cast<std::size_t>(mesh.num_triangles()));
        std::vector<Index> local(static_cast<std::size_t>(mesh.num_vertices()), -1);
        for (int k = 0; k < nsub; ++k) {
            for (Index t : sub_tris_[k])
                for (int i = 0; i < 3; ++i) {
                    const Index v = mesh.triangle(t)[i];
                    if (local[v] < 0) {
                        local[v] = static_cast<Index>(sub_verts_[k].size());
                        sub_verts_[k].push_back(v);
                    }
                    local_corner_[t][i] = local[v];
                }
            for (Index v : sub_verts_[k]) local[v] = -1;
        }

        areas_.assign(static_cast<std::size_t>(nsub), 0.0);
        for (Index t = 0; t < mesh.num_triangles(); ++t) areas_[tri_sub_[t]] += mesh.area(t);

        // interfaces and Dirichlet edges
        dirichlet_.assign(static_cast<std::size_t>(nsub), {});
        std::map<std::pair<int, int>, Interface> found;
        for (Index e = 0; e < mesh.num_edges(); ++e) {
            const MeshEdge& me = mesh.edge(e);
            if (me.on_boundary()) {
                dirichlet_[tri_sub_[me.tri[0]]].push_back(e);
                continue;
            }
            int a = tri_sub_[me.tri[0]], b = tri_sub_[me.tri[1]];
            if (a == b) continue;
            Index ta = me.tri[0], tb = me.tri[1];
            if (a > b) {
                std::swap(a, b);
                std::swap(ta, tb);
            }
            Interface& itf = found[{a, b}];
            itf.k = a;
            itf.j = b;
            itf.edges.push_back(e);
            itf.tri_k.push_back(ta);
            itf.tri_j.push_back(tb);
        }
        for (auto& [key, itf] : found) {
            std::vector<std::size_t> order(itf.edges.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                const Point px = mesh.edge_midpoint(itf.edges[x]), py = mesh.edge_midpoint(itf.edges[y]);
                return px.x != py.x ? px.x < py.x : px.y < py.y;
            });
            Interface sorted{itf.k, itf.j, {}, {}, {}, {}, 0.0};
            for (std::size_t i : order) {
                sorted.edges.push_back(itf.edges[i]);
                sorted.tri_k.push_back(itf.tri_k[i]);
                sorted.tri_j.push_back(itf.tri_j[i]);
            }
            for (std::size_t i = 0; i < sorted.edges.size(); ++i) {
                const Index e = sorted.edges[i];
                const Vec2 d = mesh.vertex(mesh.edge(e).v[1]) - mesh.vertex(mesh.edge(e).v[0]);
                const double len = norm(d);
                Vec2 nrm{d.y / len, -d.x / len};
                if (dot(nrm, mesh.centroid(sorted.tri_j[i]) - mesh.centroid(sorted.tri_k[i])) < 0.0) nrm *= -1.0;
                if (i == 0) {
                    sorted.normal = nrm;
                } else if (norm(nrm - sorted.normal) > 1e-12) {
                    throw std::invalid_argument("DomainDecomposition: interface " + std::to_string(itf.k) + "-" +
                                                std::to_string(itf.j) + " is not straight");
                }
                sorted.length += len;
            }
            interfaces_.push_back(std::move(sorted));
        }

        for (const auto& set : layout.overlaps) {
            for (int k : set)
                if (k < 0 || k >= nsub) throw std::invalid_argument("DomainDecomposition: overlap index out of range");
        }
        if (layout.overlaps.empty()) throw std::invalid_argument("DomainDecomposition: no overlapping subdomains");
    }

    int num_subdomains() const { return layout_.num_subdomains; }
    int num_overlaps() const { return static_cast<int>(layout_.overlaps.size()); }
    const Layout& layout() const { return layout_; }

    int subdomain_of(Index t) const { return tri_sub_[t]; }
    const std::vector<Index>& triangles_of(int k) const { return sub_tris_[k]; }
    const std::vector<Index>& vertices_of(int k) const { return sub_verts_[k]; }
    /// Local vertex index (within the owning subdomain) of corner i of triangle t.
    Index local_corner(Index t, int i) const { return local_corner_[t][i]; }
    double area(int k) const { return areas_[k]; }
    std::vector<Point> outline(int k) const { return layout_.outline(k); }
    double diameter(int k) const {
        const auto poly = outline(k);
        double d = 0.0;
        for (const auto& p : poly)
            for (const auto& q : poly) d = std::max(d, norm(p - q));
        return d;
    }

    const std::vector<Interface>& interfaces() const { return interfaces_; }
    const std::vector<Index>& dirichlet_edges(int k) const { return dirichlet_[k]; }
    const std::vector<int>& overlap(int j) const { return layout_.overlaps[j]; }
    bool in_overlap(int j, int k) const {
        const auto& s = layout_.overlaps[j];
        return std::find(s.begin(), s.end(), k) != s.end();
    }

    /// Number of interfaces touching basic subdomain k.
    int interface_count(int k) const {
        int c = 0;
        for (const auto& itf : interfaces_) c += (itf.k == k || itf.j == k);
        return c;
    }

    /// Every interface on the boundary of some Omega_m lies inside another
    /// Omega_l containing both of its basic subdomains.
    bool satisfies_overlap_condition() const {
        for (int m = 0; m < num_overlaps(); ++m)
            for (const auto& itf : interfaces_) {
                if (in_overlap(m, itf.k) == in_overlap(m, itf.j)) continue;
                bool covered = false;
                for (int l = 0; l < num_overlaps() && !covered; ++l)
                    covered = l != m && in_overlap(l, itf.k) && in_overlap(l, itf.j);
                if (!covered) return false;
            }
        return true;
    }

    /// Every basic subdomain lies in at least one overlapping subdomain.
    bool overlaps_cover_domain() const {
        for (int k = 0; k < num_subdomains(); ++k) {
            bool hit = false;
            for (int j = 0; j < num_overlaps() && !hit; ++j) hit = in_overlap(j, k);
            if (!hit) return false;
        }
        return true;
    }

private:
    Layout layout_;
    std::vector<int> tri_sub_;
    std::vector<std::vector<Index>> sub_tris_;
    std::vector<std::vector<Index>> sub_verts_;
    std::vector<std::array<Index, 3>> local_corner_;
    std::vector<double> areas_;
    std::vector<Interface> interfaces_;
    std::vector<std::vector<Index>> dirichlet_;
};

/// L-shaped domain ((0,1)x(0,2)) u ((0,2)x(0,1)) with omega_1 = (0,1)x(1,2),
/// omega_2 = (0,1)^2, omega_3 = (1,2)x(0,1); Omega_1 = omega_1 u omega_2 and
/// Omega_2 = omega_2 u omega_3. Subdomain indices are zero-based.
inline Layout lshape_layout() {
    Layout l;
    l.cells = {{0, 1, 0, 0}, {0, 0, 1, 1}, {1, 0, 2, 2}};
    l.num_subdomains = 3;
    l.overlaps = {{0, 1}, {1, 2}};
    return l;
}

struct MeshAndDecomposition {
    TriMesh mesh;
    DomainDecomposition decomposition;
};

inline MeshAndDecomposition build_lshape_mesh(double h) {
    const Layout layout = lshape_layout();
    TriMesh mesh = build_structured_mesh(layout, h);
    DomainDecomposition dd(mesh, layout);
    return {std::move(mesh), std::move(dd)};
}

enum class CellType { triangle, quad };

/// Coarse polygonal mesh T_omega together with its simplicial refinement
/// (the mesh on which lowest-order Raviart–Thomas fields live).
class CoarseMesh {
public:
    struct Counts {
        Index cells = 0;
        Index vertices = 0;
        Index faces = 0;
        Index dirichlet_faces = 0;
        Index faces_per_cell = 0;  ///< uniform edge count per cell, 0 when mixed
        Index per_cell_dim = 0;    ///< sum over cells of their edge counts
    };

    CoarseMesh() = default;

    /// Counts-only coarse mesh from polygons (vertex loops). Every boundary
    /// face is Dirichlet unless overridden.
    static CoarseMesh from_polygons(std::vector<Point> vertices, std::vector<std::vector<Index>> cells) {
        CoarseMesh cm;
        cm.vertices_ = std::move(vertices);
        cm.cells_ = std::move(cells);
        cm.compute_counts();
        return cm;
    }

    /// Coarse mesh of spacing H over a layout. Whole layout cells are tiled by
    /// H-squares (each split into two simplices by its diagonal); split layout
    /// cells, or `cells == triangle`, use the H-triangles themselves as cells.
    static CoarseMesh on_layout(const Layout& layout, double coarse_h, CellType cells = CellType::quad) {
        CoarseMesh cm;
        cm.simplices_ = build_structured_mesh(layout, coarse_h);
        const TriMesh& s = *cm.simplices_;
        cm.vertices_ = s.vertices();
        cm.simplex_cell_.resize(static_cast<std::size_t>(s.num_triangles()));
        cm.simplex_subdomain_.resize(static_cast<std::size_t>(s.num_triangles()));
        for (Index t = 0; t < s.num_triangles(); ++t) {
            const LayoutCell* lc = layout.cell_at(s.centroid(t));
            cm.simplex_subdomain_[t] = layout.subdomain_at(s.centroid(t));
            const bool as_quad = cells == CellType::quad && !lc->split();
            const auto& tri = s.triangle(t);
            if (as_quad && s.grid_key(t).upper) {
                // lower half precedes upper half of the same square
                cm.simplex_cell_[t] = cm.simplex_cell_[t - 1];
                continue;
            }
            cm.simplex_cell_[t] = static_cast<Index>(cm.cells_.size());
            if (as_quad) {
                const auto& up = s.triangle(t + 1);  // (p00, p11, p01)
                cm.cells_.push_back({tri[0], tri[1], tri[2], up[2]});
            } else {
                cm.cells_.push_back({tri[0], tri[1], tri[2]});
            }
            cm.cell_subdomain_.push_back(cm.simplex_subdomain_[t]);
        }
        cm.compute_counts();
        return cm;
    }

    /// Copy with the Dirichlet face count replaced (e.g. for hypothetical
    /// boundary conditions in compatibility studies).
    CoarseMesh with_dirichlet_faces(Index n) const {
        CoarseMesh c = *this;
        c.counts_.dirichlet_faces = n;
        return c;
    }

    const Counts& counts() const { return counts_; }
    const std::vector<std::vector<Index>>& cells() const { return cells_; }
    const std::vector<std::array<Index, 2>>& faces() const { return faces_; }
    bool has_simplices() const { return simplices_.has_value(); }
    const TriMesh& simplices() const { return *simplices_; }
    Index cell_of_simplex(Index t) const { return simplex_cell_[t]; }
    int subdomain_of_simplex(Index t) const { return simplex_subdomain_[t]; }
    /// True when a simplicial edge lies on a polygon cell boundary (false for
    /// the internal diagonal of a split quadrilateral).
    bool is_cell_face(Index simplex_edge) const {
        const MeshEdge& e = simplices_->edge(simplex_edge);
        if (e.on_boundary()) return true;
        return simplex_cell_[e.tri[0]] != simplex_cell_[e.tri[1]];
    }

    /// Cells tile the covered region: total cell area.
    double total_area() const {
        double a = 0.0;
        for (const auto& c : cells_) {
            for (std::size_t i = 0; i < c.size(); ++i)
                a += 0.5 * cross(vertices_[c[i]], vertices_[c[(i + 1) % c.size()]]);
        }
        return a;
    }

private:
    void compute_counts() {
        std::map<std::pair<Index, Index>, int> face_use;
        std::set<Index> used;
        Index per_cell = 0;
        Index uniform = cells_.empty() ? 0 : static_cast<Index>(cells_.front().size());
        for (const auto& c : cells_) {
            per_cell += static_cast<Index>(c.size());
            if (static_cast<Index>(c.size()) != uniform) uniform = 0;
            for (std::size_t i = 0; i < c.size(); ++i) {
                Index a = c[i], b = c[(i + 1) % c.size()];
                used.insert(a);
                if (a > b) std::swap(a, b);
                ++face_use[{a, b}];
            }
        }
        faces_.clear();
        Index boundary = 0;
        for (const auto& [f, uses] : face_use) {
            if (uses > 2) throw std::invalid_argument("CoarseMesh: face shared by more than two cells");
            faces_.push_back({f.first, f.second});
            boundary += uses == 1;
        }
        counts_ = {static_cast<Index>(cells_.size()), static_cast<Index>(used.size()),
                   static_cast<Index>(faces_.size()), boundary, uniform, per_cell};
    }

    std::vector<Point> vertices_;
    std::vector<std::vector<Index>> cells_;
    std::vector<std::array<Index, 2>> faces_;
    std::vector<int> cell_subdomain_;
    Counts counts_;
    std::optional<TriMesh> simplices_;
    std::vector<Index> simplex_cell_;
    std::vector<int> simplex_subdomain_;
};

struct CompatibilityResult {
    bool satisfied = false;
    Index slack = 0;  ///< dim Q_N + N_fD - N - N_f
};

/// Counting condition for the existence of a corrector satisfying one mean
/// equilibration constraint per cell and one mean jump constraint per
/// non-Dirichlet face: dim Q_N + N_fD >= N + N_f with dim Q_N the per-cell
/// edge count.
inline CompatibilityResult compatibility_check(const CoarseMesh& coarse) {
    const auto& c = coarse.counts();
    const Index slack = c.per_cell_dim + c.dirichlet_faces - c.cells - c.faces;
    return {slack >= 0, slack};
}

/// Layout of an m x n grid of unit cells; with `triangle` cells each unit
/// square holds two basic subdomains. For m >= 3 two overlapping column
/// strips sharing the middle column(s) are defined, otherwise a single
/// overlapping subdomain covers everything.
inline Layout rect_grid_layout(int m, int n, CellType cell_type) {
    if (m < 1 || n < 1) throw std::invalid_argument("rect_grid_layout: m and n must be >= 1");
    Layout l;
    const int per = cell_type == CellType::triangle ? 2 : 1;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < m; ++ix) {
            const int base = per * (iy * m + ix);
            l.cells.push_back({ix, iy, base, base + per - 1});
        }
    l.num_subdomains = per * m * n;
    auto columns = [&](int c0, int c1) {
        std::vector<int> s;
        for (const auto& c : l.cells)
            if (c.ix >= c0 && c.ix <= c1) {
                s.push_back(c.lower);
                if (c.split()) s.push_back(c.upper);
            }
        std::sort(s.begin(), s.end());
        return s;
    };
    if (m >= 3) {
        const int mid = m / 2;
        l.overlaps = {columns(0, mid), columns(mid, m - 1)};
    } else {
        l.overlaps = {columns(0, m - 1)};
    }
    return l;
}

struct RectGridDecomposition {
    TriMesh mesh;
    DomainDecomposition decomposition;
    CoarseMesh coarse;
};

/// m x n unit cells (2mn triangular or mn quadrilateral basic subdomains),
/// fine spacing h; the coarse mesh is the cell mesh itself.
inline RectGridDecomposition build_rect_grid_decomposition(int m, int n, double h, CellType cell_type) {
    const Layout layout = rect_grid_layout(m, n, cell_type);
    TriMesh mesh = build_structured_mesh(layout, h);
    DomainDecomposition dd(mesh, layout);
    CoarseMesh coarse = CoarseMesh::on_layout(layout, 1.0, cell_type);
    return {std::move(mesh), std::move(dd), std::move(coarse)};
}

}  // namespace ddmcert
