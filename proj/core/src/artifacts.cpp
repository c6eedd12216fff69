#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "monotomo/artifacts.hpp"

namespace monotomo {

namespace fs = std::filesystem;

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(kDigits);
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw MissingArtifact("missing artifact " + p.string());
  return in;
}

std::string trace_name(const TestPotential& p) {
  std::ostringstream os;
  os << "traces/f_" << p.i << '_' << p.j << '_' << p.k << ".csv";
  return os.str();
}

}  // namespace

void write_potential_set(const fs::path& dir, const std::vector<TestPotential>& potentials,
                         const ResponseTable& responses, const std::map<std::string, std::string>& header) {
  fs::create_directories(dir / "traces");
  // Stale traces from an earlier run would survive otherwise.
  for (const auto& entry : fs::directory_iterator(dir / "traces")) fs::remove(entry.path());

  auto manifest = open_out(dir / "manifest.txt");
  for (const auto& [k, v] : header) manifest << "# " << k << ' ' << v << '\n';
  manifest << "# columns i j k delta lambda file\n";
  for (const auto& p : potentials) {
    const std::string name = trace_name(p);
    manifest << p.i << ' ' << p.j << ' ' << p.k << ' ' << p.delta << ' ' << p.lambda << ' ' << name << '\n';
    auto trace = open_out(dir / name);
    for (Eigen::Index n = 0; n < p.trace.size(); ++n) trace << n << ',' << p.trace[n] << '\n';
  }
  auto resp = open_out(dir / "responses.csv");
  resp << "i,j,k,response\n";
  for (const auto& [key, v] : responses) resp << key.i << ',' << key.j << ',' << key.k << ',' << v << '\n';
}

PotentialSet read_potential_set(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingArtifact("missing potential directory " + dir.string());
  PotentialSet set;
  auto manifest = open_in(dir / "manifest.txt");
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key, value;
      h >> key;
      std::getline(h >> std::ws, value);
      if (key != "columns") set.header[key] = value;
      continue;
    }
    std::istringstream row(line);
    TestPotential p;
    std::string file;
    if (!(row >> p.i >> p.j >> p.k >> p.delta >> p.lambda >> file)) {
      throw std::runtime_error("malformed manifest row '" + line + "'");
    }
    auto trace = open_in(dir / file);
    std::vector<double> values;
    std::string tl;
    while (std::getline(trace, tl)) {
      if (tl.empty()) continue;
      const auto comma = tl.find(',');
      if (comma == std::string::npos) throw std::runtime_error("malformed trace row in " + file);
      values.push_back(std::stod(tl.substr(comma + 1)));
    }
    p.trace = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    set.potentials.push_back(std::move(p));
  }
  auto resp = open_in(dir / "responses.csv");
  std::getline(resp, line);
  while (std::getline(resp, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    PotentialKey key;
    double v = 0.0;
    if (!(row >> key.i >> key.j >> key.k >> v)) throw std::runtime_error("malformed response row '" + line + "'");
    set.responses[key] = v;
  }
  for (auto& p : set.potentials) {
    if (auto it = set.responses.find(key_of(p)); it != set.responses.end()) p.response = it->second;
  }
  return set;
}

void write_results_manifest(std::ostream& out, const ReconstructionResult& result, const TestGrid& grid) {
  out << std::setprecision(kDigits);
  out << "# potentials " << result.potential_count << '\n';
  out << "# seed " << result.seed << '\n';
  out << "# grid " << grid.n << '\n';
  out << "# columns i row col kept worst_margin worst_j worst_k evaluated skipped\n";
  for (std::size_t i = 0; i < result.verdicts.size(); ++i) {
    const Verdict& v = result.verdicts[i];
    const int n = std::max(grid.n, 1);
    out << i << ' ' << int(i) / n << ' ' << int(i) % n << ' ' << (v.kept ? "kept" : "discarded") << ' '
        << v.worst_margin << ' ' << v.worst.j << ' ' << v.worst.k << ' ' << v.evaluated << ' ' << v.skipped << '\n';
  }
}

void write_pgm(std::ostream& out, int n, const std::vector<std::uint8_t>& kept) {
  if (n < 1 || kept.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("write_pgm: need n*n flags");
  out << "P2\n" << n << ' ' << n << "\n255\n";
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out << (c ? " " : "") << (kept[r * n + c] ? 255 : 0);
    out << '\n';
  }
}

void write_outline_csv(std::ostream& out, const Region& region, double domain_radius) {
  out << std::setprecision(kDigits) << "part,x,y\n";
  const auto parts = region.outline(domain_radius);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    for (const auto& p : parts[k]) out << k << ',' << p.x() << ',' << p.y() << '\n';
  }
}

void write_energy_histogram(std::ostream& out, const std::map<PotentialKey, double>& readings, double transducer_k) {
  out << std::setprecision(kDigits) << "i,j,k,energy\n";
  for (const auto& [key, m] : readings) out << key.i << ',' << key.j << ',' << key.k << ',' << m / transducer_k << '\n';
}

}  // namespace monotomo
