#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "soapfilm/bitset.hpp"
#include "soapfilm/geometry.hpp"

namespace soapfilm {

using CellId = std::int32_t;
using FacetId = std::int32_t;

class CellSet;
class FacetSet;

/// Rasterized domain: a width x height grid of square cells of side
/// `spacing`, split into wire cells (the obstacle) and omega cells (the
/// complement where films live). Facets are the shared edges between
/// horizontally or vertically adjacent cells; a facet is interior iff both
/// of its cells are omega cells. Facets against wire cells or the box edge
/// carry no measure: the wetted obstacle surface is free and the box edge
/// acts as obstacle.
///
/// Cells carry area spacing^2, facets carry length spacing. Facet ids
/// enumerate all vertical facets (normal along x) in row-major order first,
/// then all horizontal facets (normal along y) in row-major order.
class Domain {
  public:
    Domain(int width, int height, double spacing, const std::function<bool(Vec2)>& wire_test);

    // Cell and facet sets hold a pointer to their domain; the domain must
    // stay put. Factories still work through guaranteed copy elision.
    Domain(const Domain&) = delete;
    Domain& operator=(const Domain&) = delete;
    Domain(Domain&&) = delete;
    Domain& operator=(Domain&&) = delete;

    int width() const { return width_; }
    int height() const { return height_; }
    double spacing() const { return h_; }

    int cell_count() const { return width_ * height_; }
    int facet_count() const { return n_vertical_ + n_horizontal_; }
    int vertical_facet_count() const { return n_vertical_; }

    bool is_wire(CellId c) const { return wire_.test(static_cast<std::size_t>(c)); }
    bool is_omega(CellId c) const { return !is_wire(c); }
    int omega_cell_count() const { return omega_count_; }
    int interior_facet_count() const { return interior_count_; }

    const CellSet& omega_cells() const;
    const CellSet& wire_cells() const;
    const FacetSet& interior_facets() const;

    CellId cell_id(int x, int y) const { return y * width_ + x; }
    int cell_x(CellId c) const { return c % width_; }
    int cell_y(CellId c) const { return c / width_; }
    Vec2 cell_center(CellId c) const {
        return {(cell_x(c) + 0.5) * h_, (cell_y(c) + 0.5) * h_};
    }
    /// Cell containing p, or -1 if outside the box.
    CellId cell_at(const Vec2& p) const;

    bool facet_is_vertical(FacetId f) const { return f < n_vertical_; }
    /// Vertical facet between (x,y) and (x+1,y); x in [0,width-2].
    FacetId vertical_facet(int x, int y) const { return y * (width_ - 1) + x; }
    /// Horizontal facet between (x,y) and (x,y+1); y in [0,height-2].
    FacetId horizontal_facet(int x, int y) const { return n_vertical_ + y * width_ + x; }

    /// The two cells sharing facet f (a has the smaller id).
    std::pair<CellId, CellId> facet_cells(FacetId f) const;
    bool facet_interior(FacetId f) const { return interior_.test(static_cast<std::size_t>(f)); }

    Vec2 facet_midpoint(FacetId f) const;
    /// Endpoints of the facet segment (grid corner points).
    std::pair<Vec2, Vec2> facet_segment(FacetId f) const;

    /// Facet between two 4-adjacent cells, or -1 if not adjacent.
    FacetId facet_between(CellId a, CellId b) const;

    /// Neighbors of c across interior facets: fn(neighbor, facet).
    template <class Fn>
    void for_each_interior_neighbor(CellId c, Fn&& fn) const {
        int x = cell_x(c), y = cell_y(c);
        if (x > 0 && facet_interior(vertical_facet(x - 1, y))) fn(cell_id(x - 1, y), vertical_facet(x - 1, y));
        if (x + 1 < width_ && facet_interior(vertical_facet(x, y))) fn(cell_id(x + 1, y), vertical_facet(x, y));
        if (y > 0 && facet_interior(horizontal_facet(x, y - 1))) fn(cell_id(x, y - 1), horizontal_facet(x, y - 1));
        if (y + 1 < height_ && facet_interior(horizontal_facet(x, y))) fn(cell_id(x, y + 1), horizontal_facet(x, y));
    }

    /// All (up to 4) facets incident to cell c, interior or not: fn(facet).
    template <class Fn>
    void for_each_incident_facet(CellId c, Fn&& fn) const {
        int x = cell_x(c), y = cell_y(c);
        if (x > 0) fn(vertical_facet(x - 1, y));
        if (x + 1 < width_) fn(vertical_facet(x, y));
        if (y > 0) fn(horizontal_facet(x, y - 1));
        if (y + 1 < height_) fn(horizontal_facet(x, y));
    }

    /// Grid corner point ids; corner (x,y) with x in [0,width], y in [0,height].
    int corner_id(int x, int y) const { return y * (width_ + 1) + x; }
    int corner_count() const { return (width_ + 1) * (height_ + 1); }
    /// The two corner ids spanned by facet f.
    std::pair<int, int> facet_corners(FacetId f) const;
    Vec2 corner_point(int corner) const {
        return {(corner % (width_ + 1)) * h_, (corner / (width_ + 1)) * h_};
    }

  private:
    int width_;
    int height_;
    double h_;
    int n_vertical_;
    int n_horizontal_;
    int omega_count_ = 0;
    int interior_count_ = 0;
    DynamicBitset wire_;
    DynamicBitset interior_;
    // Materialized views, built once in the constructor.
    std::vector<CellSet> cached_cellsets_;
    std::vector<FacetSet> cached_facetsets_;
};

/// Subset of omega cells with cached count. Plays the role of a set of
/// finite perimeter; area = count * h^2.
class CellSet {
  public:
    CellSet() = default;
    explicit CellSet(const Domain& dom) : dom_(&dom), bits_(dom.cell_count()) {}

    const Domain& domain() const { return *dom_; }
    bool test(CellId c) const { return bits_.test(static_cast<std::size_t>(c)); }
    void set(CellId c) {
        if (!bits_.test(c)) {
            bits_.set(c);
            ++count_;
        }
    }
    void reset(CellId c) {
        if (bits_.test(c)) {
            bits_.reset(c);
            --count_;
        }
    }
    void toggle(CellId c) { test(c) ? reset(c) : set(c); }

    std::int64_t count() const { return count_; }
    bool empty() const { return count_ == 0; }
    double area() const { return count_ * dom_->spacing() * dom_->spacing(); }

    template <class Fn>
    void for_each(Fn&& fn) const {
        bits_.for_each([&](std::size_t i) { fn(static_cast<CellId>(i)); });
    }

    bool operator==(const CellSet& o) const { return bits_ == o.bits_; }

    CellSet& operator|=(const CellSet& o) {
        bits_ |= o.bits_;
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    CellSet& operator&=(const CellSet& o) {
        bits_ &= o.bits_;
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    CellSet& subtract(const CellSet& o) {
        bits_.subtract(o.bits_);
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    bool is_subset_of(const CellSet& o) const { return bits_.is_subset_of(o.bits_); }
    bool intersects(const CellSet& o) const { return bits_.intersects(o.bits_); }

    const DynamicBitset& bits() const { return bits_; }
    DynamicBitset& mutable_bits() { return bits_; }
    void recount() { count_ = static_cast<std::int64_t>(bits_.count()); }

  private:
    const Domain* dom_ = nullptr;
    DynamicBitset bits_;
    std::int64_t count_ = 0;
};

/// Subset of interior facets with cached count. Plays the role of a locally
/// H^n-finite set; measure = count * h.
class FacetSet {
  public:
    FacetSet() = default;
    explicit FacetSet(const Domain& dom) : dom_(&dom), bits_(dom.facet_count()) {}

    const Domain& domain() const { return *dom_; }
    bool test(FacetId f) const { return bits_.test(static_cast<std::size_t>(f)); }
    void set(FacetId f) {
        if (!bits_.test(f)) {
            bits_.set(f);
            ++count_;
        }
    }
    void reset(FacetId f) {
        if (bits_.test(f)) {
            bits_.reset(f);
            --count_;
        }
    }
    void toggle(FacetId f) { test(f) ? reset(f) : set(f); }

    std::int64_t count() const { return count_; }
    bool empty() const { return count_ == 0; }
    double measure() const { return count_ * dom_->spacing(); }

    template <class Fn>
    void for_each(Fn&& fn) const {
        bits_.for_each([&](std::size_t i) { fn(static_cast<FacetId>(i)); });
    }

    bool operator==(const FacetSet& o) const { return bits_ == o.bits_; }

    FacetSet& operator|=(const FacetSet& o) {
        bits_ |= o.bits_;
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    FacetSet& operator&=(const FacetSet& o) {
        bits_ &= o.bits_;
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    FacetSet& operator^=(const FacetSet& o) {
        bits_ ^= o.bits_;
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    FacetSet& subtract(const FacetSet& o) {
        bits_.subtract(o.bits_);
        count_ = static_cast<std::int64_t>(bits_.count());
        return *this;
    }
    bool is_subset_of(const FacetSet& o) const { return bits_.is_subset_of(o.bits_); }
    bool intersects(const FacetSet& o) const { return bits_.intersects(o.bits_); }

    const DynamicBitset& bits() const { return bits_; }
    DynamicBitset& mutable_bits() { return bits_; }
    void recount() { count_ = static_cast<std::int64_t>(bits_.count()); }

  private:
    const Domain* dom_ = nullptr;
    DynamicBitset bits_;
    std::int64_t count_ = 0;
};

/// Density class of an interior facet relative to a cell set E: both cells
/// in E, both outside, or mixed. Discrete E^(1) / E^(0) / reduced boundary.
enum class FacetDensityClass { InteriorOfE, ExteriorOfE, ReducedBoundary };

/// Interior facets with exactly one side in E. Realizes Omega ∩ ∂*E: facets
/// against wire or the box edge are never included (free boundary there).
FacetSet reduced_boundary(const CellSet& E, const Domain& dom);

/// Trichotomy for one facet. Throws NonInteriorFacetError on non-interior f.
FacetDensityClass facet_density_class(const CellSet& E, FacetId f);

/// Relative perimeter P(E; region): h times the number of reduced-boundary
/// facets with both adjacent cells in `region` (open-region convention;
/// facets on the region's own boundary are not counted).
double perimeter(const CellSet& E, const CellSet& region);

/// P(E; Omega).
double perimeter(const CellSet& E);

}  // namespace soapfilm
