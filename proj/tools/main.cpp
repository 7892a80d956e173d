// Command-line driver: scene-driven spanning checks, constrained
// minimization, geometric reports and convergence studies.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "soapfilm/errors.hpp"
#include "soapfilm/io.hpp"
#include "soapfilm/mincut.hpp"
#include "soapfilm/scene.hpp"

namespace fs = std::filesystem;
using namespace soapfilm;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

SceneConfig load_scene(const std::string& path, std::optional<std::uint64_t> seed,
                       std::optional<std::string> out, std::optional<std::string> mode,
                       std::optional<double> volume) {
    SceneConfig scene = SceneConfig::parse_file(path);
    if (seed) scene.optimizer.seed = *seed;
    if (out) scene.output_dir = *out;
    if (volume) scene.volume = *volume;
    if (mode) {
        if (*mode == "plateau")
            scene.mode = ProblemMode::Plateau;
        else if (*mode == "bulk")
            scene.mode = ProblemMode::Bulk;
        else if (*mode == "foam")
            scene.mode = ProblemMode::Foam;
        else
            throw BadSceneError("unknown mode: " + *mode);
    }
    return scene;
}

int cmd_span_check(const SceneConfig& scene, const std::string& pair_path,
                   const std::string& out_path) {
    Domain dom = scene.build_domain();
    SpanningClass cls = scene.build_spanning_class(dom);
    FilmPair pair = read_pair_file(pair_path, dom);
    SpanningMode mode = scene.mode == ProblemMode::Plateau ? SpanningMode::Bd : SpanningMode::Bulk;
    SpanningCertificate cert = is_spanning(pair, cls, mode);
    std::string text = certificate_json(cert);
    if (!out_path.empty())
        write_text_file(out_path, text);
    else
        std::cout << text << '\n';
    return cert.spanning ? 0 : 1;
}

int cmd_minimize(const SceneConfig& scene) {
    Timer total;
    Domain dom = scene.build_domain();
    fs::create_directories(scene.output_dir);
    RunManifest manifest;
    manifest.seed = scene.optimizer.seed;
    std::string canonical = scene.canonical_json();
    manifest.config_hash = fnv1a_hex(canonical);

    Timer solve;
    MinimizeResult result;
    if (scene.mode == ProblemMode::Foam) {
        std::vector<CellSet> chambers = scene.build_chambers(dom);
        result = foam_relax(dom, chambers, scene.liquid_fraction, scene.lambda0, scene.r0,
                            scene.optimizer);
    } else {
        SpanningClass cls = scene.build_spanning_class(dom);
        if (scene.mode == ProblemMode::Plateau)
            result = minimize_plateau(dom, cls, scene.optimizer);
        else
            result = minimize_bulk(dom, cls, scene.volume, scene.optimizer);
    }
    manifest.timings_sec.push_back({"solve", solve.seconds()});

    auto emit = [&](const std::string& name, const std::string& content) {
        write_text_file((fs::path(scene.output_dir) / name).string(), content);
        manifest.file_checksums.push_back({name, fnv1a_hex(content)});
    };
    write_pair_file((fs::path(scene.output_dir) / "pair.sfpb").string(), result.pair);
    manifest.file_checksums.push_back(
        {"pair.sfpb", fnv1a_hex(read_text_file((fs::path(scene.output_dir) / "pair.sfpb").string()))});
    emit("scene.json", canonical);
    emit("trace.csv", trace_csv(result.trace));
    emit("energy.json", energy_json(result.energy));
    emit("certificate.json", certificate_json(result.certificate));
    if (!result.chamber_label.empty()) {
        std::ostringstream labels;
        labels << "cell,label\n";
        for (std::size_t c = 0; c < result.chamber_label.size(); ++c)
            if (result.chamber_label[c] >= 0) labels << c << ',' << result.chamber_label[c] << '\n';
        emit("chambers.csv", labels.str());
    }
    manifest.timings_sec.push_back({"total", total.seconds()});
    write_text_file((fs::path(scene.output_dir) / "manifest.json").string(),
                    manifest_json(manifest));
    std::cout << "energy " << result.energy.total << " volume_error " << result.volume_error_cells
              << " spanning " << (result.certificate.spanning ? "yes" : "no") << '\n';
    if (!result.certificate.spanning && scene.mode != ProblemMode::Foam) return 1;
    return 0;
}

int cmd_report(const std::string& result_dir) {
    fs::path dir(result_dir);
    if (!fs::exists(dir / "scene.json") || !fs::exists(dir / "pair.sfpb")) {
        std::cerr << "missing scene.json or pair.sfpb in " << result_dir << '\n';
        return 2;
    }
    SceneConfig scene = SceneConfig::parse_text(read_text_file((dir / "scene.json").string()));
    Domain dom = scene.build_domain();
    FilmPair pair = read_pair_file((dir / "pair.sfpb").string(), dom);
    pair.normalize();
    std::vector<InterfaceChain> chains = extract_chains(pair);
    FitReport fit = fit_and_check(pair, chains);
    write_text_file((dir / "fit.json").string(), fit_report_json(fit, chains, dom));
    write_text_file((dir / "chains.csv").string(), chains_csv(chains, dom));
    write_text_file((dir / "render.svg").string(), render_svg(pair, &chains, &fit));
    std::cout << "chains " << chains.size() << " transitions " << fit.transitions.size()
              << " junctions " << fit.junctions.size() << '\n';
    return 0;
}

int cmd_partition(const SceneConfig& scene, const std::string& pair_path,
                  const std::string& out_path) {
    Domain dom = scene.build_domain();
    FilmPair pair = read_pair_file(pair_path, dom);
    CellSet dry = dom.omega_cells();
    dry.subtract(pair.E);
    Partition part = essential_partition(pair.derived_K(), dry);
    std::string text = partition_csv(part);
    if (!out_path.empty())
        write_text_file(out_path, text);
    else
        std::cout << text;
    return 0;
}

int cmd_study(const SceneConfig& scene, const std::string& volumes_arg) {
    Domain dom = scene.build_domain();
    SpanningClass cls = scene.build_spanning_class(dom);
    std::vector<double> volumes;
    std::stringstream ss(volumes_arg);
    std::string item;
    while (std::getline(ss, item, ',')) volumes.push_back(std::stod(item));
    std::vector<ConvergenceRow> rows = convergence_study(dom, cls, volumes, scene.optimizer);
    std::string text = convergence_csv(rows);
    fs::create_directories(scene.output_dir);
    write_text_file((fs::path(scene.output_dir) / "study.csv").string(), text);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete soap-film and foam toolkit: homotopic spanning certificates, "
                 "constrained perimeter minimization, equilibrium-law reports"};
    app.require_subcommand(1);

    std::string scene_path, pair_path, out_path, result_dir, mode_arg, volumes_arg;
    std::optional<std::uint64_t> seed;
    std::optional<double> volume_arg;

    auto add_scene_opts = [&](CLI::App* cmd) {
        cmd->add_option("--scene", scene_path, "scene JSON file")->required();
        cmd->add_option("--seed", seed, "override optimizer seed");
        cmd->add_option("--out", out_path, "output directory or file");
        cmd->add_option("--mode", mode_arg, "override problem mode (plateau|bulk|foam)");
        cmd->add_option("--volume", volume_arg, "override bulk volume");
    };

    CLI::App* span = app.add_subcommand("span-check", "verify a spanning certificate for a pair file");
    add_scene_opts(span);
    span->add_option("--pair", pair_path, "pair bitmap file")->required();

    CLI::App* minimize = app.add_subcommand("minimize", "run the constrained minimization");
    add_scene_opts(minimize);

    CLI::App* report = app.add_subcommand("report", "fit chains and render a result directory");
    report->add_option("--result", result_dir, "result directory from minimize")->required();

    CLI::App* partition = app.add_subcommand("partition", "dump the essential partition induced by a pair");
    add_scene_opts(partition);
    partition->add_option("--pair", pair_path, "pair bitmap file")->required();

    CLI::App* study = app.add_subcommand("study", "vanishing-volume convergence table");
    add_scene_opts(study);
    study->add_option("--volumes", volumes_arg, "comma-separated volume list")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (span->parsed()) {
            SceneConfig scene = load_scene(scene_path, seed, std::nullopt,
                                           mode_arg.empty() ? std::nullopt : std::optional(mode_arg),
                                           volume_arg);
            return cmd_span_check(scene, pair_path, out_path);
        }
        if (minimize->parsed()) {
            SceneConfig scene = load_scene(scene_path, seed,
                                           out_path.empty() ? std::nullopt : std::optional(out_path),
                                           mode_arg.empty() ? std::nullopt : std::optional(mode_arg),
                                           volume_arg);
            return cmd_minimize(scene);
        }
        if (report->parsed()) return cmd_report(result_dir);
        if (partition->parsed()) {
            SceneConfig scene = load_scene(scene_path, seed, std::nullopt,
                                           mode_arg.empty() ? std::nullopt : std::optional(mode_arg),
                                           volume_arg);
            return cmd_partition(scene, pair_path, out_path);
        }
        if (study->parsed()) {
            SceneConfig scene = load_scene(scene_path, seed,
                                           out_path.empty() ? std::nullopt : std::optional(out_path),
                                           mode_arg.empty() ? std::nullopt : std::optional(mode_arg),
                                           volume_arg);
            return cmd_study(scene, volumes_arg);
        }
    } catch (const VolumeInfeasibleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const BadSceneError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
