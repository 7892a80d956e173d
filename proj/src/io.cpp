#include "soapfilm/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "soapfilm/errors.hpp"

namespace soapfilm {

using nlohmann::json;

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw IoError("pair file truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
    return v;
}

double get_f64(const std::string& in, std::size_t& pos) {
    if (pos + 8 > in.size()) throw IoError("pair file truncated");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos++])) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_bits(std::string& out, int count, const std::function<bool(int)>& bit) {
    unsigned char byte = 0;
    int nb = 0;
    for (int i = 0; i < count; ++i) {
        if (bit(i)) byte |= static_cast<unsigned char>(1u << nb);
        if (++nb == 8) {
            out.push_back(static_cast<char>(byte));
            byte = 0;
            nb = 0;
        }
    }
    if (nb > 0) out.push_back(static_cast<char>(byte));
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_pair_file(const std::string& path, const FilmPair& pair) {
    const Domain& dom = pair.domain();
    std::string out = "SFPB";
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(dom.width()));
    put_u32(out, static_cast<std::uint32_t>(dom.height()));
    put_f64(out, dom.spacing());
    put_bits(out, dom.cell_count(), [&](int i) { return pair.E.test(i); });
    put_bits(out, dom.facet_count(), [&](int i) { return pair.K_extra.test(i); });
    write_text_file(path, out);
}

FilmPair read_pair_file(const std::string& path, const Domain& dom) {
    std::string in = read_text_file(path);
    if (in.size() < 4 || in.compare(0, 4, "SFPB") != 0) throw IoError("bad pair file magic");
    std::size_t pos = 4;
    std::uint32_t version = get_u32(in, pos);
    if (version != 1) throw IoError("unsupported pair file version");
    std::uint32_t w = get_u32(in, pos), h = get_u32(in, pos);
    double spacing = get_f64(in, pos);
    if (static_cast<int>(w) != dom.width() || static_cast<int>(h) != dom.height() ||
        std::abs(spacing - dom.spacing()) > 1e-12)
        throw IoError("pair file does not match the scene grid");
    FilmPair pair(dom);
    auto read_bits = [&](int count, auto&& set_bit) {
        for (int i = 0; i < count; i += 8) {
            if (pos >= in.size()) throw IoError("pair file truncated");
            unsigned char byte = static_cast<unsigned char>(in[pos++]);
            for (int b = 0; b < 8 && i + b < count; ++b)
                if ((byte >> b) & 1) set_bit(i + b);
        }
    };
    read_bits(dom.cell_count(), [&](int i) {
        if (dom.is_wire(i)) throw IoError("pair file has E on wire cells");
        pair.E.set(i);
    });
    read_bits(dom.facet_count(), [&](int i) {
        if (!dom.facet_interior(i)) throw IoError("pair file has K on non-interior facets");
        pair.K_extra.set(i);
    });
    return pair;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream out;
    out << "step,temperature,energy,volume_error_cells\n";
    out.precision(17);
    for (const auto& row : trace)
        out << row.step << ',' << row.temperature << ',' << row.energy << ','
            << row.volume_error_cells << '\n';
    return out.str();
}

std::string partition_csv(const Partition& part) {
    std::ostringstream out;
    out << "cell,label\n";
    part.base.for_each([&](CellId c) { out << c << ',' << part.label_of(c) << '\n'; });
    return out.str();
}

std::string chains_csv(const std::vector<InterfaceChain>& chains, const Domain& dom) {
    std::ostringstream out;
    out << "chain,multiplicity,closed,point_index,x,y\n";
    out.precision(17);
    for (std::size_t i = 0; i < chains.size(); ++i) {
        std::vector<Vec2> pts = smoothed_polyline(chains[i], dom);
        for (std::size_t k = 0; k < pts.size(); ++k)
            out << i << ',' << chains[i].multiplicity << ',' << (chains[i].closed ? 1 : 0) << ','
                << k << ',' << pts[k].x << ',' << pts[k].y << '\n';
    }
    return out.str();
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream out;
    out << "v,psi_hat,two_ell_hat,gap,wetting_distance\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.v << ',' << r.psi_hat << ',' << r.two_ell_hat << ',' << r.gap << ','
            << r.wetting_distance << '\n';
    return out.str();
}

std::string certificate_json(const SpanningCertificate& cert) {
    json j;
    j["spanning"] = cert.spanning;
    j["mode"] = cert.mode == SpanningMode::Bulk ? "bulk" : "bd";
    j["tubes"] = json::array();
    for (const auto& t : cert.tubes) {
        json tj;
        tj["generator"] = t.generator_id;
        tj["spanning"] = t.spanning;
        if (!t.spanning) {
            tj["failing_slice"] = t.failing_slice;
            tj["failing_facet"] = t.failing_facet;
            tj["witness_loop_cells"] = t.witness_loop;
        }
        j["tubes"].push_back(tj);
    }
    return j.dump(2);
}

std::string energy_json(const EnergyReport& rep) {
    json j;
    j["perimeter_term"] = rep.perimeter_term;
    j["collapsed_term"] = rep.collapsed_term;
    j["total"] = rep.total;
    j["region"] = rep.region;
    return j.dump(2);
}

std::string fit_report_json(const FitReport& fit, const std::vector<InterfaceChain>& chains,
                            const Domain& dom) {
    json j;
    j["chains"] = json::array();
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const auto& c = chains[i];
        const auto& f = fit.fits[i];
        json cj;
        cj["multiplicity"] = c.multiplicity;
        cj["facets"] = c.facets.size();
        cj["closed"] = c.closed;
        cj["corrected_length"] = corrected_length(c, dom);
        cj["kind"] = f.kind == FitKind::Segment ? "segment"
                     : f.kind == FitKind::Arc  ? "arc"
                                               : "unfit";
        cj["curvature"] = f.curvature;
        cj["rms"] = f.rms;
        j["chains"].push_back(cj);
    }
    j["transitions"] = json::array();
    for (const auto& t : fit.transitions) {
        json tj;
        tj["x"] = t.point.x;
        tj["y"] = t.point.y;
        tj["sheet_chain"] = t.chain_a;
        tj["arc_chain"] = t.chain_b;
        tj["tangent_mismatch_deg"] = t.mismatch * 180.0 / M_PI;
        j["transitions"].push_back(tj);
    }
    j["junctions"] = json::array();
    for (const auto& jr : fit.junctions) {
        json jj;
        jj["x"] = jr.point.x;
        jj["y"] = jr.point.y;
        jj["chains"] = jr.chains;
        json angles = json::array();
        for (double a : jr.pairwise_angles) angles.push_back(a * 180.0 / M_PI);
        jj["pairwise_angles_deg"] = angles;
        j["junctions"].push_back(jj);
    }
    return j.dump(2);
}

namespace {

void svg_line(std::ostringstream& out, double box_h, Vec2 a, Vec2 b, const char* color,
              double width) {
    out << "<line x1=\"" << a.x << "\" y1=\"" << box_h - a.y << "\" x2=\"" << b.x << "\" y2=\""
        << box_h - b.y << "\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\" stroke-linecap=\"round\"/>\n";
}

}  // namespace

std::string render_svg(const FilmPair& pair, const std::vector<InterfaceChain>* chains,
                       const FitReport* fit) {
    const Domain& dom = pair.domain();
    const double h = dom.spacing();
    const double W = dom.width() * h, H = dom.height() * h;
    std::ostringstream out;
    out.precision(10);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << -h << ' ' << -h << ' '
        << W + 2 * h << ' ' << H + 2 * h << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
        << "\" fill=\"white\" stroke=\"#999\" stroke-width=\"" << 0.25 * h << "\"/>\n";

    // Row-merged fills for wire and E.
    auto fill_rows = [&](const char* color, auto&& pred) {
        for (int y = 0; y < dom.height(); ++y) {
            int x = 0;
            while (x < dom.width()) {
                if (!pred(dom.cell_id(x, y))) {
                    ++x;
                    continue;
                }
                int x0 = x;
                while (x < dom.width() && pred(dom.cell_id(x, y))) ++x;
                out << "<rect x=\"" << x0 * h << "\" y=\"" << H - (y + 1) * h << "\" width=\""
                    << (x - x0) * h << "\" height=\"" << h << "\" fill=\"" << color << "\"/>\n";
            }
        }
    };
    fill_rows("#b0b0b0", [&](CellId c) { return dom.is_wire(c); });
    fill_rows("#bcd8f0", [&](CellId c) { return pair.E.test(c); });

    // K facets: thin for multiplicity one, bold for the collapsed part.
    FacetSet K = pair.derived_K();
    K.for_each([&](FacetId f) {
        auto [a, b] = dom.facet_cells(f);
        bool mult2 = pair.E.test(a) == pair.E.test(b);
        auto [p, q] = dom.facet_segment(f);
        svg_line(out, H, p, q, mult2 ? "#111111" : "#2060c0", (mult2 ? 0.45 : 0.2) * h);
    });

    if (fit && chains) {
        for (std::size_t i = 0; i < fit->fits.size(); ++i) {
            const ChainFit& cf = fit->fits[i];
            if (cf.kind == FitKind::Segment) {
                svg_line(out, H, cf.p0, cf.p1, "#d01010", 0.15 * h);
            } else if (cf.kind == FitKind::Arc) {
                out << "<circle cx=\"" << cf.center.x << "\" cy=\"" << H - cf.center.y
                    << "\" r=\"" << cf.radius
                    << "\" fill=\"none\" stroke=\"#10a010\" stroke-width=\"" << 0.15 * h
                    << "\"/>\n";
            }
        }
        for (const auto& t : fit->transitions)
            out << "<circle cx=\"" << t.point.x << "\" cy=\"" << H - t.point.y << "\" r=\""
                << 0.8 * h << "\" fill=\"none\" stroke=\"#e08000\" stroke-width=\"" << 0.2 * h
                << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string manifest_json(const RunManifest& manifest) {
    json j;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["version"] = manifest.version;
    json t = json::object();
    for (const auto& [name, sec] : manifest.timings_sec) t[name] = sec;
    j["timings_sec"] = t;
    json c = json::object();
    for (const auto& [name, sum] : manifest.file_checksums) c[name] = sum;
    j["checksums"] = c;
    return j.dump(2);
}

}  // namespace soapfilm
