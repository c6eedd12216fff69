#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace monotomo::cli {

struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides [output] dir
  std::optional<std::uint64_t> seed;         // overrides [noise] seed
  int jobs = 1;
  bool quiet = false;
};

/// Solves the forward problem on the configured true anomaly; writes
/// field.csv and prints the Dirichlet energy.
void cmd_forward(const CommonOptions& opt, const std::string& trace, double scale, std::ostream& out);

/// Synthesizes potentials and test-anomaly responses into <out>/potentials.
void cmd_precompute(const CommonOptions& opt, std::ostream& out);

/// Measures, reconstructs, and writes results.txt, union.pgm, outline.csv and
/// histogram.csv into <out>.
void cmd_reconstruct(const CommonOptions& opt, const std::optional<std::filesystem::path>& potentials,
                     std::ostream& out);

/// Naive baseline: random trigonometric traces searched for a negative
/// <avg Lambda_A(f) - avg Lambda_T(f), f> on one test cell.
void cmd_bench(const CommonOptions& opt, int cell, int samples, int modes, std::ostream& out);

}  // namespace monotomo::cli
