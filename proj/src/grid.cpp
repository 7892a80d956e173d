#include "soapfilm/grid.hpp"

#include "soapfilm/errors.hpp"

namespace soapfilm {

Domain::Domain(int width, int height, double spacing, const std::function<bool(Vec2)>& wire_test)
    : width_(width),
      height_(height),
      h_(spacing),
      n_vertical_((width - 1) * height),
      n_horizontal_(width * (height - 1)),
      wire_(static_cast<std::size_t>(width) * height),
      interior_(static_cast<std::size_t>(n_vertical_) + n_horizontal_) {
    if (width < 1 || height < 1 || spacing <= 0) throw BadSceneError("degenerate grid");
    for (CellId c = 0; c < cell_count(); ++c) {
        if (wire_test && wire_test(cell_center(c))) wire_.set(c);
    }
    omega_count_ = cell_count() - static_cast<int>(wire_.count());
    if (omega_count_ == 0) throw EmptyOmegaError("wire covers the whole box");

    for (int y = 0; y < height_; ++y)
        for (int x = 0; x + 1 < width_; ++x) {
            FacetId f = vertical_facet(x, y);
            if (is_omega(cell_id(x, y)) && is_omega(cell_id(x + 1, y))) interior_.set(f);
        }
    for (int y = 0; y + 1 < height_; ++y)
        for (int x = 0; x < width_; ++x) {
            FacetId f = horizontal_facet(x, y);
            if (is_omega(cell_id(x, y)) && is_omega(cell_id(x, y + 1))) interior_.set(f);
        }
    interior_count_ = static_cast<int>(interior_.count());

    cached_cellsets_.resize(2, CellSet(*this));
    for (CellId c = 0; c < cell_count(); ++c) {
        if (is_omega(c))
            cached_cellsets_[0].set(c);
        else
            cached_cellsets_[1].set(c);
    }
    cached_facetsets_.resize(1, FacetSet(*this));
    for (FacetId f = 0; f < facet_count(); ++f)
        if (facet_interior(f)) cached_facetsets_[0].set(f);
}

const CellSet& Domain::omega_cells() const { return cached_cellsets_[0]; }
const CellSet& Domain::wire_cells() const { return cached_cellsets_[1]; }
const FacetSet& Domain::interior_facets() const { return cached_facetsets_[0]; }

CellId Domain::cell_at(const Vec2& p) const {
    int x = static_cast<int>(p.x / h_);
    int y = static_cast<int>(p.y / h_);
    if (p.x < 0 || p.y < 0 || x >= width_ || y >= height_) return -1;
    return cell_id(x, y);
}

std::pair<CellId, CellId> Domain::facet_cells(FacetId f) const {
    if (f < n_vertical_) {
        int x = f % (width_ - 1);
        int y = f / (width_ - 1);
        return {cell_id(x, y), cell_id(x + 1, y)};
    }
    int g = f - n_vertical_;
    int x = g % width_;
    int y = g / width_;
    return {cell_id(x, y), cell_id(x, y + 1)};
}

Vec2 Domain::facet_midpoint(FacetId f) const {
    if (f < n_vertical_) {
        int x = f % (width_ - 1);
        int y = f / (width_ - 1);
        return {(x + 1) * h_, (y + 0.5) * h_};
    }
    int g = f - n_vertical_;
    int x = g % width_;
    int y = g / width_;
    return {(x + 0.5) * h_, (y + 1) * h_};
}

std::pair<Vec2, Vec2> Domain::facet_segment(FacetId f) const {
    if (f < n_vertical_) {
        int x = f % (width_ - 1);
        int y = f / (width_ - 1);
        return {Vec2{(x + 1) * h_, y * h_}, Vec2{(x + 1) * h_, (y + 1) * h_}};
    }
    int g = f - n_vertical_;
    int x = g % width_;
    int y = g / width_;
    return {Vec2{x * h_, (y + 1) * h_}, Vec2{(x + 1) * h_, (y + 1) * h_}};
}

std::pair<int, int> Domain::facet_corners(FacetId f) const {
    if (f < n_vertical_) {
        int x = f % (width_ - 1);
        int y = f / (width_ - 1);
        return {corner_id(x + 1, y), corner_id(x + 1, y + 1)};
    }
    int g = f - n_vertical_;
    int x = g % width_;
    int y = g / width_;
    return {corner_id(x, y + 1), corner_id(x + 1, y + 1)};
}

FacetId Domain::facet_between(CellId a, CellId b) const {
    int ax = cell_x(a), ay = cell_y(a), bx = cell_x(b), by = cell_y(b);
    if (ay == by && bx == ax + 1) return vertical_facet(ax, ay);
    if (ay == by && ax == bx + 1) return vertical_facet(bx, ay);
    if (ax == bx && by == ay + 1) return horizontal_facet(ax, ay);
    if (ax == bx && ay == by + 1) return horizontal_facet(ax, by);
    return -1;
}

FacetSet reduced_boundary(const CellSet& E, const Domain& dom) {
    FacetSet out(dom);
    E.for_each([&](CellId c) {
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId f) {
            if (!E.test(nb)) out.set(f);
        });
    });
    return out;
}

FacetDensityClass facet_density_class(const CellSet& E, FacetId f) {
    const Domain& dom = E.domain();
    if (!dom.facet_interior(f)) throw NonInteriorFacetError("facet is not interior");
    auto [a, b] = dom.facet_cells(f);
    bool ia = E.test(a), ib = E.test(b);
    if (ia && ib) return FacetDensityClass::InteriorOfE;
    if (!ia && !ib) return FacetDensityClass::ExteriorOfE;
    return FacetDensityClass::ReducedBoundary;
}

double perimeter(const CellSet& E, const CellSet& region) {
    const Domain& dom = E.domain();
    std::int64_t n = 0;
    // Iterate over the smaller side: boundary facets of E restricted to region.
    E.for_each([&](CellId c) {
        if (!region.test(c)) return;
        dom.for_each_interior_neighbor(c, [&](CellId nb, FacetId) {
            if (!E.test(nb) && region.test(nb)) ++n;
        });
    });
    return static_cast<double>(n) * dom.spacing();
}

double perimeter(const CellSet& E) { return perimeter(E, E.domain().omega_cells()); }

}  // namespace soapfilm
