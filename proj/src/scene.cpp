#include "soapfilm/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "soapfilm/errors.hpp"

namespace soapfilm {

using nlohmann::json;

bool WirePrimitive::contains(const Vec2& p) const {
    switch (kind) {
        case Kind::Disk:
            return dist(p, {x0, y0}) <= r;
        case Kind::Rect:
            return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
        case Kind::Capsule:
            return point_segment_distance(p, {x0, y0}, {x1, y1}) <= r;
    }
    return false;
}

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw BadSceneError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw BadSceneError(where + ": unknown key '" + it.key() + "'");
}

double need_num(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw BadSceneError(where + ": missing numeric '" + std::string(key) + "'");
    return j[key].get<double>();
}

}  // namespace

SceneConfig SceneConfig::parse_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw BadSceneError(std::string("scene parse error: ") + e.what());
    }
    require_keys(j, {"box", "resolution", "wire", "generators", "problem", "optimizer", "output"},
                 "scene");

    SceneConfig sc;
    if (!j.contains("box")) throw BadSceneError("scene: missing box");
    require_keys(j["box"], {"w", "h"}, "box");
    sc.box_w = need_num(j["box"], "w", "box");
    sc.box_h = need_num(j["box"], "h", "box");
    sc.resolution = need_num(j, "resolution", "scene");
    if (sc.resolution <= 0) throw BadSceneError("resolution must be positive");

    if (j.contains("wire")) {
        if (!j["wire"].is_array()) throw BadSceneError("wire: expected an array");
        for (const auto& w : j["wire"]) {
            if (!w.contains("type") || !w["type"].is_string())
                throw BadSceneError("wire primitive: missing type");
            std::string type = w["type"].get<std::string>();
            WirePrimitive p;
            if (type == "disk") {
                require_keys(w, {"type", "cx", "cy", "r"}, "disk");
                p.kind = WirePrimitive::Kind::Disk;
                p.x0 = need_num(w, "cx", "disk");
                p.y0 = need_num(w, "cy", "disk");
                p.r = need_num(w, "r", "disk");
                if (p.r <= 0) throw BadSceneError("disk: radius must be positive");
                if (p.x0 - p.r < -1e-9 || p.x0 + p.r > sc.box_w + 1e-9 || p.y0 - p.r < -1e-9 ||
                    p.y0 + p.r > sc.box_h + 1e-9)
                    throw BadSceneError("disk: does not fit in the box");
            } else if (type == "rect") {
                require_keys(w, {"type", "x0", "y0", "x1", "y1"}, "rect");
                p.kind = WirePrimitive::Kind::Rect;
                p.x0 = need_num(w, "x0", "rect");
                p.y0 = need_num(w, "y0", "rect");
                p.x1 = need_num(w, "x1", "rect");
                p.y1 = need_num(w, "y1", "rect");
                if (p.x1 <= p.x0 || p.y1 <= p.y0) throw BadSceneError("rect: degenerate extents");
                if (p.x0 < -1e-9 || p.y0 < -1e-9 || p.x1 > sc.box_w + 1e-9 || p.y1 > sc.box_h + 1e-9)
                    throw BadSceneError("rect: does not fit in the box");
            } else if (type == "capsule") {
                require_keys(w, {"type", "x0", "y0", "x1", "y1", "r"}, "capsule");
                p.kind = WirePrimitive::Kind::Capsule;
                p.x0 = need_num(w, "x0", "capsule");
                p.y0 = need_num(w, "y0", "capsule");
                p.x1 = need_num(w, "x1", "capsule");
                p.y1 = need_num(w, "y1", "capsule");
                p.r = need_num(w, "r", "capsule");
                if (p.r <= 0) throw BadSceneError("capsule: radius must be positive");
            } else {
                throw BadSceneError("wire primitive: unknown type '" + type + "'");
            }
            sc.wire.push_back(p);
        }
    }

    if (j.contains("generators")) {
        if (!j["generators"].is_array()) throw BadSceneError("generators: expected an array");
        for (const auto& g : j["generators"]) {
            require_keys(g, {"id", "vertices", "tube_radius"}, "generator");
            GeneratorSpec spec;
            spec.id = g.contains("id") && g["id"].is_string() ? g["id"].get<std::string>() : "";
            spec.tube_radius = need_num(g, "tube_radius", "generator");
            if (!g.contains("vertices") || !g["vertices"].is_array())
                throw BadSceneError("generator: missing vertices");
            for (const auto& v : g["vertices"]) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw BadSceneError("generator: vertices must be [x, y] pairs");
                spec.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            if (spec.vertices.size() < 3) throw BadSceneError("generator: needs >= 3 vertices");
            sc.generators.push_back(std::move(spec));
        }
    }

    if (j.contains("problem")) {
        const auto& p = j["problem"];
        require_keys(p, {"mode", "volume", "chambers", "liquid_fraction", "lambda0", "r0"},
                     "problem");
        std::string mode = p.contains("mode") && p["mode"].is_string()
                               ? p["mode"].get<std::string>()
                               : "plateau";
        if (mode == "plateau")
            sc.mode = ProblemMode::Plateau;
        else if (mode == "bulk")
            sc.mode = ProblemMode::Bulk;
        else if (mode == "foam")
            sc.mode = ProblemMode::Foam;
        else
            throw BadSceneError("problem: unknown mode '" + mode + "'");
        if (p.contains("volume")) sc.volume = need_num(p, "volume", "problem");
        if (p.contains("liquid_fraction"))
            sc.liquid_fraction = need_num(p, "liquid_fraction", "problem");
        if (p.contains("lambda0")) sc.lambda0 = need_num(p, "lambda0", "problem");
        if (p.contains("r0")) sc.r0 = need_num(p, "r0", "problem");
        if (p.contains("chambers")) {
            if (!p["chambers"].is_array()) throw BadSceneError("chambers: expected an array");
            for (const auto& c : p["chambers"]) {
                require_keys(c, {"x0", "y0", "x1", "y1"}, "chamber");
                RectSpec r;
                r.x0 = need_num(c, "x0", "chamber");
                r.y0 = need_num(c, "y0", "chamber");
                r.x1 = need_num(c, "x1", "chamber");
                r.y1 = need_num(c, "y1", "chamber");
                sc.chambers.push_back(r);
            }
        }
    }

    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        require_keys(o,
                     {"seed", "t_initial", "t_final", "cooling", "moves_per_temperature",
                      "restarts", "volume_penalty", "exact_swap", "trace_stride"},
                     "optimizer");
        if (o.contains("seed")) sc.optimizer.seed = o["seed"].get<std::uint64_t>();
        if (o.contains("t_initial")) sc.optimizer.t_initial = need_num(o, "t_initial", "optimizer");
        if (o.contains("t_final")) sc.optimizer.t_final = need_num(o, "t_final", "optimizer");
        if (o.contains("cooling")) sc.optimizer.cooling = need_num(o, "cooling", "optimizer");
        if (o.contains("moves_per_temperature"))
            sc.optimizer.moves_per_temperature =
                static_cast<int>(need_num(o, "moves_per_temperature", "optimizer"));
        if (o.contains("restarts"))
            sc.optimizer.restarts = static_cast<int>(need_num(o, "restarts", "optimizer"));
        if (o.contains("volume_penalty")) {
            const auto& vp = o["volume_penalty"];
            if (!vp.is_array() || vp.size() != 2)
                throw BadSceneError("optimizer: volume_penalty must be [w0, w1]");
            sc.optimizer.volume_penalty_initial = vp[0].get<double>();
            sc.optimizer.volume_penalty_final = vp[1].get<double>();
        }
        if (o.contains("exact_swap")) {
            if (!o["exact_swap"].is_boolean()) throw BadSceneError("optimizer: exact_swap must be bool");
            sc.optimizer.exact_swap = o["exact_swap"].get<bool>();
        }
        if (o.contains("trace_stride"))
            sc.optimizer.trace_stride = static_cast<int>(need_num(o, "trace_stride", "optimizer"));
        if (sc.optimizer.t_initial <= 0 || sc.optimizer.t_final <= 0 ||
            sc.optimizer.t_final > sc.optimizer.t_initial)
            throw BadSceneError("optimizer: temperatures must be positive and decreasing");
    }

    if (j.contains("output")) {
        if (!j["output"].is_string()) throw BadSceneError("output: expected a string");
        sc.output_dir = j["output"].get<std::string>();
    }
    return sc;
}

SceneConfig SceneConfig::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scene file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_text(text);
}

std::string SceneConfig::canonical_json() const {
    json j;
    j["box"] = {{"w", box_w}, {"h", box_h}};
    j["resolution"] = resolution;
    j["wire"] = json::array();
    for (const auto& w : wire) {
        json p;
        switch (w.kind) {
            case WirePrimitive::Kind::Disk:
                p = {{"type", "disk"}, {"cx", w.x0}, {"cy", w.y0}, {"r", w.r}};
                break;
            case WirePrimitive::Kind::Rect:
                p = {{"type", "rect"}, {"x0", w.x0}, {"y0", w.y0}, {"x1", w.x1}, {"y1", w.y1}};
                break;
            case WirePrimitive::Kind::Capsule:
                p = {{"type", "capsule"}, {"x0", w.x0}, {"y0", w.y0},
                     {"x1", w.x1}, {"y1", w.y1}, {"r", w.r}};
                break;
        }
        j["wire"].push_back(p);
    }
    j["generators"] = json::array();
    for (const auto& g : generators) {
        json gj;
        gj["id"] = g.id;
        gj["tube_radius"] = g.tube_radius;
        gj["vertices"] = json::array();
        for (const auto& v : g.vertices) gj["vertices"].push_back({v.x, v.y});
        j["generators"].push_back(gj);
    }
    json p;
    p["mode"] = mode == ProblemMode::Plateau ? "plateau" : mode == ProblemMode::Bulk ? "bulk" : "foam";
    p["volume"] = volume;
    p["liquid_fraction"] = liquid_fraction;
    p["lambda0"] = lambda0;
    p["r0"] = r0;
    p["chambers"] = json::array();
    for (const auto& c : chambers)
        p["chambers"].push_back({{"x0", c.x0}, {"y0", c.y0}, {"x1", c.x1}, {"y1", c.y1}});
    j["problem"] = p;
    j["optimizer"] = {{"seed", optimizer.seed},
                      {"t_initial", optimizer.t_initial},
                      {"t_final", optimizer.t_final},
                      {"cooling", optimizer.cooling},
                      {"moves_per_temperature", optimizer.moves_per_temperature},
                      {"restarts", optimizer.restarts},
                      {"volume_penalty", {optimizer.volume_penalty_initial, optimizer.volume_penalty_final}},
                      {"exact_swap", optimizer.exact_swap},
                      {"trace_stride", optimizer.trace_stride}};
    j["output"] = output_dir;
    return j.dump(2);
}

Domain SceneConfig::build_domain() const {
    double wf = box_w / resolution;
    double hf = box_h / resolution;
    int W = static_cast<int>(std::llround(wf));
    int H = static_cast<int>(std::llround(hf));
    if (W < 1 || H < 1 || std::fabs(wf - W) > 1e-6 || std::fabs(hf - H) > 1e-6)
        throw BadSceneError("box dimensions must be integer multiples of the resolution");
    auto wire_test = [this](Vec2 p) {
        for (const auto& w : wire)
            if (w.contains(p)) return true;
        return false;
    };
    return Domain(W, H, resolution, wire_test);
}

SpanningClass SceneConfig::build_spanning_class(const Domain& dom) const {
    std::vector<SpanningGenerator> gens;
    for (const auto& g : generators) {
        SpanningGenerator sg;
        sg.id = g.id;
        sg.tube_radius = g.tube_radius;
        sg.loop.pts = g.vertices;
        gens.push_back(std::move(sg));
    }
    return soapfilm::build_spanning_class(dom, std::move(gens));
}

std::vector<CellSet> SceneConfig::build_chambers(const Domain& dom) const {
    if (chambers.empty()) throw BadSceneError("foam mode needs chambers");
    const double h = dom.spacing();
    std::vector<CellSet> out(chambers.size(), CellSet(dom));
    std::vector<std::int32_t> owner(dom.cell_count(), -1);
    dom.omega_cells().for_each([&](CellId c) {
        Vec2 p = dom.cell_center(c);
        for (std::size_t i = 0; i < chambers.size(); ++i) {
            const RectSpec& r = chambers[i];
            if (p.x >= r.x0 && p.x < r.x1 && p.y >= r.y0 && p.y < r.y1) {
                owner[c] = static_cast<std::int32_t>(i);
                return;
            }
        }
    });
    dom.omega_cells().for_each([&](CellId c) {
        if (owner[c] < 0) throw BadSceneError("chambers must cover omega");
        out[owner[c]].set(c);
    });

    std::int64_t liquid_cells = static_cast<std::int64_t>(std::llround(liquid_fraction / (h * h)));
    if (liquid_cells < 0 || liquid_cells > dom.omega_cell_count())
        throw VolumeInfeasibleError("liquid fraction out of range");
    // Carve the liquid from the cells nearest the box center, round-robin.
    Vec2 center{box_w / 2, box_h / 2};
    std::vector<std::vector<std::pair<double, CellId>>> ranked(chambers.size());
    for (std::size_t i = 0; i < chambers.size(); ++i) {
        out[i].for_each([&](CellId c) {
            Vec2 d = dom.cell_center(c) - center;
            ranked[i].push_back({dot(d, d), c});
        });
        std::sort(ranked[i].begin(), ranked[i].end());
    }
    std::vector<std::size_t> cursor(chambers.size(), 0);
    std::int64_t carved = 0;
    while (carved < liquid_cells) {
        bool any = false;
        for (std::size_t i = 0; i < chambers.size() && carved < liquid_cells; ++i) {
            if (cursor[i] >= ranked[i].size()) continue;
            out[i].reset(ranked[i][cursor[i]++].second);
            ++carved;
            any = true;
        }
        if (!any) throw VolumeInfeasibleError("cannot carve the requested liquid fraction");
    }
    return out;
}

}  // namespace soapfilm
