#pragma once

#include <string>
#include <vector>

#include "soapfilm/anneal.hpp"
#include "soapfilm/chains.hpp"
#include "soapfilm/fitting.hpp"
#include "soapfilm/partition.hpp"
#include "soapfilm/study.hpp"

namespace soapfilm {

inline constexpr const char* kVersionString = "soapfilm 0.1.0";

/// Pair bitmap file, bit-exact and endian-fixed (little endian):
///   magic "SFPB" | u32 version=1 | u32 width | u32 height | f64 spacing |
///   cell bits (E membership, row-major, LSB-first within each byte) |
///   facet bits (K_extra, all vertical facets row-major then all horizontal
///   facets row-major, LSB-first).
void write_pair_file(const std::string& path, const FilmPair& pair);
FilmPair read_pair_file(const std::string& path, const Domain& dom);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string trace_csv(const std::vector<TraceRow>& trace);
std::string partition_csv(const Partition& part);
std::string chains_csv(const std::vector<InterfaceChain>& chains, const Domain& dom);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

std::string certificate_json(const SpanningCertificate& cert);
std::string energy_json(const EnergyReport& rep);
std::string fit_report_json(const FitReport& fit, const std::vector<InterfaceChain>& chains,
                            const Domain& dom);

/// SVG render: wire gray, E filled, multiplicity-one facets thin,
/// multiplicity-two facets bold, fitted primitives and transition markers
/// overlaid when a fit report is given.
std::string render_svg(const FilmPair& pair, const std::vector<InterfaceChain>* chains,
                       const FitReport* fit);

/// FNV-1a 64-bit hex digest (used for config hashes and result checksums).
std::string fnv1a_hex(const std::string& bytes);

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersionString;
    std::vector<std::pair<std::string, double>> timings_sec;
    std::vector<std::pair<std::string, std::string>> file_checksums;
};

std::string manifest_json(const RunManifest& manifest);

}  // namespace soapfilm
