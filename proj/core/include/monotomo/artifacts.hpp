#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "monotomo/inversion.hpp"

namespace monotomo {

/// On-disk potential set:
///   manifest.txt       header lines "# key value", then rows "i j k delta lambda file"
///   traces/*.csv       one "index,value" row per boundary node
///   responses.csv      "i,j,k,response" rows
struct PotentialSet {
  std::vector<TestPotential> potentials;
  ResponseTable responses;
  std::map<std::string, std::string> header;
};

void write_potential_set(const std::filesystem::path& dir, const std::vector<TestPotential>& potentials,
                         const ResponseTable& responses, const std::map<std::string, std::string>& header);

/// Throws MissingArtifact when the directory or a referenced file is absent,
/// std::runtime_error on malformed content.
PotentialSet read_potential_set(const std::filesystem::path& dir);

/// Per-test verdict rows: "i row col kept worst_margin worst_j worst_k evaluated skipped".
void write_results_manifest(std::ostream& out, const ReconstructionResult& result, const TestGrid& grid);

/// Plain PGM (P2), one pixel per grid cell: 255 kept, 0 discarded.
void write_pgm(std::ostream& out, int n, const std::vector<std::uint8_t>& kept);

/// "part,x,y" rows tracing the region outline.
void write_outline_csv(std::ostream& out, const Region& region, double domain_radius);

/// "i,j,k,energy" rows with energy = reading / k.
void write_energy_histogram(std::ostream& out, const std::map<PotentialKey, double>& readings, double transducer_k);

}  // namespace monotomo
