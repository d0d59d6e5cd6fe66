#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "richards/newton.hpp"
#include "richards/spectral.hpp"

namespace richards {

enum class ExperimentKind { kSimulate1d, kSimulate3d, kSpectrum1d, kPrecondSweep, kAsEquivalence };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// (time step, Newton iterate) at which a Jacobian is inspected.
struct IteratePair {
  int step = 1;
  int iterate = 0;
  bool operator<(const IteratePair& o) const {
    return step != o.step ? step < o.step : iterate < o.iterate;
  }
  bool operator==(const IteratePair& o) const = default;
};

/// A validated experiment description read from an INI-style file.
struct Scenario {
  std::string name;
  ExperimentKind experiment = ExperimentKind::kSimulate1d;
  std::string output_dir;

  int dimension = 1;
  std::array<int, 3> nodes = {1, 1, 3};
  std::array<double, 3> extent = {0.0, 0.0, 1.0};
  int steps = 1;
  double dt = 1.0;

  BoundarySpec boundary;
  VanGenuchtenParams soil;
  AverageKind average = AverageKind::kArithmetic;
  bool include_rho_phi = true;
  NewtonConfig newton;
  PrecondConfig precond;

  std::vector<IteratePair> spectrum_pairs;
  int n_theta = 0;  // 0: one sample per interior node
  std::vector<PrecondKind> sweep;

  /// Sorted "section.key = value" lines of the source file.
  std::string canonical;
  std::uint64_t hash() const;

  ProblemGrid grid() const;
  Discretization discretization() const;
};

/// Parse or validation failure. `line` is 0 when the problem is not tied
/// to one line (e.g. a missing key).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line = 0, std::string key = {})
      : std::runtime_error(what), line(line), key(std::move(key)) {}
  int line;
  std::string key;
};

Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(std::string_view text, const std::string& name = "scenario");

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

struct RunOptions {
  std::string output_dir;  // overrides the scenario's when set
  int threads = 1;
  std::ostream* log = nullptr;
};

/// Runs the experiment and writes its CSV files and summary.txt. Returns 0
/// iff every solve converged.
int run_scenario(const Scenario& s, const RunOptions& options = {});

/// Writes the Jacobian at (step, iterate) as Matrix Market and returns the
/// file path. Throws std::runtime_error if the run never reaches the pair.
std::string export_matrix(const Scenario& s, IteratePair at, const RunOptions& options = {});

/// First line of every CSV: "# " + provenance.
std::string provenance(const Scenario& s);

}  // namespace richards
