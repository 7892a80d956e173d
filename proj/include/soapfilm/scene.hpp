#pragma once

#include <string>
#include <vector>

#include "soapfilm/anneal.hpp"
#include "soapfilm/grid.hpp"
#include "soapfilm/spanning.hpp"

namespace soapfilm {

struct WirePrimitive {
    enum class Kind { Disk, Rect, Capsule } kind = Kind::Disk;
    // disk: center (x0,y0), radius r; rect: corners (x0,y0)-(x1,y1);
    // capsule: segment (x0,y0)-(x1,y1) thickened by r.
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0, r = 0;

    bool contains(const Vec2& p) const;
};

struct GeneratorSpec {
    std::string id;
    std::vector<Vec2> vertices;  ///< closed loop (closing edge implicit)
    double tube_radius = 0.0;
};

enum class ProblemMode { Plateau, Bulk, Foam };

struct RectSpec {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Parsed scene: box, resolution, wire primitives, spanning generators and
/// the problem block. Parsing is strict: unknown keys are rejected.
struct SceneConfig {
    double box_w = 1.0, box_h = 1.0;
    double resolution = 1.0 / 64.0;
    std::vector<WirePrimitive> wire;
    std::vector<GeneratorSpec> generators;

    ProblemMode mode = ProblemMode::Plateau;
    double volume = 0.0;                ///< bulk mode
    std::vector<RectSpec> chambers;     ///< foam mode
    double liquid_fraction = 0.0;       ///< foam mode
    double lambda0 = 0.0, r0 = 0.0;     ///< foam mode minimality parameters

    AnnealParams optimizer;
    std::string output_dir = "out";

    static SceneConfig parse_file(const std::string& path);
    static SceneConfig parse_text(const std::string& json_text);

    /// Canonical serialized form (used for hashing and for result folders).
    std::string canonical_json() const;

    Domain build_domain() const;
    SpanningClass build_spanning_class(const Domain& dom) const;
    /// Foam initial chambers: rect assignment with the liquid carved from the
    /// cells nearest the box center, round-robin across chambers.
    std::vector<CellSet> build_chambers(const Domain& dom) const;
};

}  // namespace soapfilm
