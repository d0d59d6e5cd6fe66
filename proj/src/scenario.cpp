#include "richards/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Core>

namespace richards {

namespace {

constexpr const char* kToolVersion = "richards-kit 0.1.0";

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment", {"kind", "output"}},
      {"grid", {"dimension", "nx", "ny", "nz", "lx", "ly", "lz", "nt", "dt"}},
      {"boundary",
       {"bc_kind", "h_r", "h_top", "alpha_bc", "patch_x_lo", "patch_x_hi", "patch_y_lo",
        "patch_y_hi"}},
      {"soil", {"alpha", "beta", "gamma", "a", "s_s", "s_r", "k_s", "rho", "phi",
                "clamp_saturated"}},
      {"discretization", {"average", "include_rho_phi"}},
      {"newton",
       {"eta", "max_iterations", "reuse_period", "step_growth", "tiny_step", "ftol", "u_scale",
        "f_scale", "full_newton", "c1", "goldstein", "backtrack", "min_step", "gmres_restart",
        "gmres_maxit"}},
      {"preconditioner",
       {"precond", "blocks", "overlap", "on_full_jacobian", "theta", "smoothed",
        "max_aggregate", "coarse_stop", "max_levels", "coarse_solver", "coarse_blocks",
        "coarse_tol", "coarse_maxit"}},
      {"spectrum", {"pairs", "n_theta"}},
      {"sweep", {"preconditioners"}},
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

// Typed access to the raw key/value entries.
class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  const Entry& require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      const auto dot = key.find('.');
      throw ScenarioError("scenario: missing required key '" + key.substr(dot + 1) +
                              "' in [" + key.substr(0, dot) + "]",
                          0, key.substr(dot + 1));
    }
    return it->second;
  }

  std::string text(const std::string& key) const { return require(key).value; }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  double number(const std::string& key) const {
    const Entry& e = require(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(e.value, &used);
      if (used == e.value.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    fail(key, "expected a finite number, got '" + e.value + "'");
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  int integer(const std::string& key) const {
    const Entry& e = require(key);
    try {
      std::size_t used = 0;
      const long v = std::stol(e.value, &used);
      if (used == e.value.size() && v >= INT32_MIN && v <= INT32_MAX) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    fail(key, "expected an integer, got '" + e.value + "'");
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = text(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const int ln = line(key);
    const auto dot = key.find('.');
    throw ScenarioError("scenario: " + key + ": " + why +
                            (ln > 0 ? " (line " + std::to_string(ln) + ")" : ""),
                        ln, key.substr(dot + 1));
  }

  void check(bool ok, const std::string& key, const std::string& rule) const {
    if (!ok) fail(key, "out of range, " + rule);
  }

 private:
  std::map<std::string, Entry> entries_;
};

std::map<std::string, Entry> tokenize(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  auto error = [&line](const std::string& why) {
    return ScenarioError("scenario: line " + std::to_string(line) + ": " + why, line);
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (auto c = s.find_first_of("#;"); c != std::string::npos) s.erase(c);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw error("malformed section header '" + s + "'");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (!known_keys().count(section)) throw error("unknown section [" + section + "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw error("expected 'key = value', got '" + s + "'");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (section.empty()) throw error("key '" + key + "' appears before any section");
    if (!known_keys().at(section).count(key))
      throw ScenarioError("scenario: line " + std::to_string(line) + ": unknown key '" + key +
                              "' in [" + section + "]",
                          line, key);
    if (value.empty()) throw error("empty value for '" + key + "'");
    const std::string full = section + "." + key;
    if (entries.count(full))
      throw error("duplicate key '" + key + "' (first set on line " +
                  std::to_string(entries[full].line) + ")");
    entries[full] = Entry{value, line};
  }
  return entries;
}

IteratePair parse_pair(const Reader& r, const std::string& item) {
  const auto colon = item.find(':');
  if (colon == std::string::npos) r.fail("spectrum.pairs", "expected step:iterate, got '" + item + "'");
  try {
    IteratePair p{std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))};
    r.check(p.step >= 1 && p.iterate >= 0, "spectrum.pairs", "need step >= 1 and iterate >= 0");
    return p;
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception&) {
    r.fail("spectrum.pairs", "expected step:iterate, got '" + item + "'");
  }
}

// Maps "van genuchten: alpha must be > 0" style messages to the key.
template <typename Validate>
void validate_section(const Reader& r, const std::string& section, Validate&& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    std::string key;
    for (const auto& k : known_keys().at(section)) {
      const auto pos = msg.find(": " + k + " ");
      if (pos != std::string::npos) key = k;
    }
    const int ln = key.empty() ? 0 : r.line(section + "." + key);
    throw ScenarioError("scenario: [" + section + "] " + msg +
                            (ln > 0 ? " (line " + std::to_string(ln) + ")" : ""),
                        ln, key);
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSimulate1d: return "simulate_1d";
    case ExperimentKind::kSimulate3d: return "simulate_3d";
    case ExperimentKind::kSpectrum1d: return "spectrum_1d";
    case ExperimentKind::kPrecondSweep: return "precond_sweep";
    case ExperimentKind::kAsEquivalence: return "as_equivalence";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (ExperimentKind k : {ExperimentKind::kSimulate1d, ExperimentKind::kSimulate3d,
                           ExperimentKind::kSpectrum1d, ExperimentKind::kPrecondSweep,
                           ExperimentKind::kAsEquivalence})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t Scenario::hash() const { return fnv1a(canonical); }

ProblemGrid Scenario::grid() const {
  return dimension == 1 ? ProblemGrid::line(nodes[2], extent[2], steps, dt)
                        : ProblemGrid::box(nodes, extent, steps, dt);
}

Discretization Scenario::discretization() const {
  Discretization::Options opt;
  opt.include_rho_phi = include_rho_phi;
  return Discretization(grid(), boundary, soil, average, opt);
}

Scenario parse_scenario_text(std::string_view text, const std::string& name) {
  std::map<std::string, Entry> entries = tokenize(text);
  Scenario s;
  s.name = name;
  {
    std::string canon;
    for (const auto& [k, e] : entries) canon += k + " = " + e.value + "\n";
    s.canonical = canon;
  }
  const Reader r(std::move(entries));

  auto choose = [&r](const std::string& key, auto&& convert) {
    try {
      return convert(r.text(key));
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      r.fail(key, e.what());
    }
  };

  s.experiment = choose("experiment.kind", experiment_kind_from_string);
  s.output_dir = r.text("experiment.output", "out/" + name);

  // Grid.
  s.dimension = r.integer("grid.dimension");
  r.check(s.dimension == 1 || s.dimension == 3, "grid.dimension", "must be 1 or 3");
  s.nodes[2] = r.integer("grid.nz");
  r.check(s.nodes[2] >= 3, "grid.nz", "must be >= 3");
  s.extent[2] = r.number("grid.lz");
  r.check(s.extent[2] > 0.0, "grid.lz", "must be > 0");
  if (s.dimension == 3) {
    s.nodes[0] = r.integer("grid.nx");
    s.nodes[1] = r.integer("grid.ny");
    r.check(s.nodes[0] >= 3, "grid.nx", "must be >= 3");
    r.check(s.nodes[1] >= 3, "grid.ny", "must be >= 3");
    s.extent[0] = r.number("grid.lx");
    s.extent[1] = r.number("grid.ly");
    r.check(s.extent[0] > 0.0, "grid.lx", "must be > 0");
    r.check(s.extent[1] > 0.0, "grid.ly", "must be > 0");
  } else {
    for (const char* key : {"grid.nx", "grid.ny", "grid.lx", "grid.ly"})
      if (r.has(key)) r.fail(key, "not used by a one-dimensional grid");
  }
  s.steps = r.integer("grid.nt");
  r.check(s.steps >= 0, "grid.nt", "must be >= 0");
  s.dt = r.number("grid.dt");
  r.check(s.dt > 0.0, "grid.dt", "must be > 0");

  // Boundary.
  s.boundary.kind = choose("boundary.bc_kind", boundary_kind_from_string);
  s.boundary.h_r = r.number("boundary.h_r");
  if (s.boundary.kind == BoundaryKind::kTopDirichlet) s.boundary.h_top = r.number("boundary.h_top");
  if (s.boundary.kind == BoundaryKind::kTopPatch && s.dimension != 3)
    r.fail("boundary.bc_kind", "top_patch needs a three-dimensional grid");
  s.boundary.alpha_bc = r.number("boundary.alpha_bc", s.boundary.alpha_bc);
  r.check(s.boundary.alpha_bc > 0.0, "boundary.alpha_bc", "must be > 0");
  s.boundary.patch = {r.number("boundary.patch_x_lo", s.boundary.patch[0]),
                      r.number("boundary.patch_x_hi", s.boundary.patch[1]),
                      r.number("boundary.patch_y_lo", s.boundary.patch[2]),
                      r.number("boundary.patch_y_hi", s.boundary.patch[3])};
  validate_section(r, "boundary", [&] { s.boundary.validate(); });

  // Soil.
  VanGenuchtenParams& vg = s.soil;
  vg.alpha = r.number("soil.alpha", vg.alpha);
  vg.beta = r.number("soil.beta", vg.beta);
  vg.gamma = r.number("soil.gamma", vg.gamma);
  vg.a = r.number("soil.a", vg.a);
  vg.s_s = r.number("soil.s_s", vg.s_s);
  vg.s_r = r.number("soil.s_r", vg.s_r);
  vg.k_s = r.number("soil.k_s", vg.k_s);
  vg.rho = r.number("soil.rho", vg.rho);
  vg.phi = r.number("soil.phi", vg.phi);
  vg.clamp_saturated = r.flag("soil.clamp_saturated", vg.clamp_saturated);
  validate_section(r, "soil", [&] { vg.validate(); });

  // Discretization.
  s.average = choose("discretization.average", average_kind_from_string);
  s.include_rho_phi = r.flag("discretization.include_rho_phi", s.dimension == 3);

  // Newton.
  NewtonConfig& nc = s.newton;
  nc.eta = r.number("newton.eta", nc.eta);
  nc.max_iterations = r.integer("newton.max_iterations", nc.max_iterations);
  nc.reuse_period = r.integer("newton.reuse_period", nc.reuse_period);
  nc.step_growth = r.number("newton.step_growth", nc.step_growth);
  nc.tiny_step = r.number("newton.tiny_step", nc.tiny_step);
  nc.ftol = r.number("newton.ftol", nc.ftol);
  nc.u_scale = r.number("newton.u_scale", nc.u_scale);
  nc.f_scale = r.number("newton.f_scale", nc.f_scale);
  nc.full_newton = r.flag("newton.full_newton", nc.full_newton);
  nc.c1 = r.number("newton.c1", nc.c1);
  nc.goldstein = r.number("newton.goldstein", nc.goldstein);
  nc.backtrack = r.number("newton.backtrack", nc.backtrack);
  nc.min_step = r.number("newton.min_step", nc.min_step);
  nc.gmres_restart = r.integer("newton.gmres_restart", nc.gmres_restart);
  nc.gmres_maxit = r.integer("newton.gmres_maxit", nc.gmres_maxit);
  r.check(nc.eta > 0.0 && nc.eta < 1.0, "newton.eta", "must lie in (0,1)");
  r.check(nc.max_iterations > 0, "newton.max_iterations", "must be > 0");
  r.check(nc.reuse_period > 0, "newton.reuse_period", "must be > 0");
  r.check(nc.u_scale > 0.0, "newton.u_scale", "must be > 0");
  r.check(nc.f_scale > 0.0, "newton.f_scale", "must be > 0");
  r.check(nc.gmres_restart > 0, "newton.gmres_restart", "must be > 0");
  r.check(nc.gmres_maxit > 0, "newton.gmres_maxit", "must be > 0");
  validate_section(r, "newton", [&] { nc.validate(); });

  // Preconditioner.
  PrecondConfig& pc = s.precond;
  if (r.has("preconditioner.precond"))
    pc.kind = choose("preconditioner.precond", precond_kind_from_string);
  if (r.has("preconditioner.blocks")) {
    // "n" or "n_x x n_y".
    const std::string v = r.text("preconditioner.blocks");
    const auto x = v.find('x');
    try {
      std::size_t used = 0;
      if (x == std::string::npos) {
        pc.blocks_x = std::stoi(v, &used);
        pc.blocks_y = 1;
        if (used != v.size()) throw std::invalid_argument(v);
      } else {
        const std::string bx = trim(v.substr(0, x)), by = trim(v.substr(x + 1));
        pc.blocks_x = std::stoi(bx, &used);
        if (used != bx.size()) throw std::invalid_argument(v);
        pc.blocks_y = std::stoi(by, &used);
        if (used != by.size()) throw std::invalid_argument(v);
      }
    } catch (const std::exception&) {
      r.fail("preconditioner.blocks", "expected n or n_x x n_y, got '" + v + "'");
    }
    r.check(pc.blocks_x >= 1 && pc.blocks_y >= 1, "preconditioner.blocks", "must be >= 1");
  }
  pc.overlap = r.integer("preconditioner.overlap", pc.overlap);
  pc.on_full_jacobian = r.flag("preconditioner.on_full_jacobian", pc.on_full_jacobian);
  r.check(pc.overlap >= 0, "preconditioner.overlap", "must be >= 0");
  AmgOptions& amg = pc.amg;
  amg.theta = r.number("preconditioner.theta", amg.theta);
  amg.smoothed = r.flag("preconditioner.smoothed", amg.smoothed);
  amg.max_aggregate = r.integer("preconditioner.max_aggregate", amg.max_aggregate);
  amg.coarse_stop = r.integer("preconditioner.coarse_stop", amg.coarse_stop);
  amg.max_levels = r.integer("preconditioner.max_levels", amg.max_levels);
  amg.coarse_blocks = r.integer("preconditioner.coarse_blocks", amg.coarse_blocks);
  amg.coarse_tol = r.number("preconditioner.coarse_tol", amg.coarse_tol);
  amg.coarse_maxit = r.integer("preconditioner.coarse_maxit", amg.coarse_maxit);
  if (r.has("preconditioner.coarse_solver")) {
    const std::string v = r.text("preconditioner.coarse_solver");
    if (v == "pcg")
      amg.coarse_solver = CoarseSolverKind::kPcg;
    else if (v == "direct")
      amg.coarse_solver = CoarseSolverKind::kDirect;
    else
      r.fail("preconditioner.coarse_solver", "expected pcg or direct, got '" + v + "'");
  }
  r.check(amg.theta >= 0.0 && amg.theta < 1.0, "preconditioner.theta", "must lie in [0,1)");
  r.check(amg.max_aggregate >= 2, "preconditioner.max_aggregate", "must be >= 2");
  r.check(amg.coarse_stop >= 1, "preconditioner.coarse_stop", "must be >= 1");
  r.check(amg.max_levels >= 1, "preconditioner.max_levels", "must be >= 1");
  r.check(amg.coarse_blocks >= 1, "preconditioner.coarse_blocks", "must be >= 1");
  r.check(amg.coarse_tol > 0.0 && amg.coarse_tol < 1.0, "preconditioner.coarse_tol",
          "must lie in (0,1)");
  r.check(amg.coarse_maxit >= 1, "preconditioner.coarse_maxit", "must be >= 1");

  // Experiment-specific sections.
  const bool needs_line = s.experiment == ExperimentKind::kSimulate1d ||
                          s.experiment == ExperimentKind::kSpectrum1d;
  if (needs_line && s.dimension != 1)
    r.fail("grid.dimension", to_string(s.experiment) + " needs dimension = 1");
  if (s.experiment == ExperimentKind::kSimulate3d && s.dimension != 3)
    r.fail("grid.dimension", "simulate_3d needs dimension = 3");

  if (s.experiment == ExperimentKind::kSpectrum1d) {
    for (const auto& item : split_list(r.text("spectrum.pairs")))
      s.spectrum_pairs.push_back(parse_pair(r, item));
    if (s.spectrum_pairs.empty()) r.fail("spectrum.pairs", "no pairs given");
    s.n_theta = r.integer("spectrum.n_theta", 0);
    r.check(s.n_theta >= 0, "spectrum.n_theta", "must be >= 0");
  }
  if (s.experiment == ExperimentKind::kPrecondSweep) {
    for (const auto& item : split_list(r.text("sweep.preconditioners"))) {
      try {
        s.sweep.push_back(precond_kind_from_string(item));
      } catch (const std::invalid_argument& e) {
        r.fail("sweep.preconditioners", e.what());
      }
    }
    if (s.sweep.empty()) r.fail("sweep.preconditioners", "no preconditioners given");
  }

  // The grid and boundary constructors re-check their own invariants.
  try {
    (void)s.discretization();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("scenario: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), std::filesystem::path(path).stem().string());
}

std::string provenance(const Scenario& s) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(s.hash()));
  return std::string(kToolVersion) + " eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." +
         std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION) +
         " scenario=" + s.name + " experiment=" + to_string(s.experiment) +
         " config_hash=" + hash;
}

namespace {

std::string num(double v, int digits = 12) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const Scenario& s, const std::string& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    out_ << "# " << provenance(s) << "\n" << header << "\n";
  }
  template <typename... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cells), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

struct RunContext {
  const Scenario& s;
  std::filesystem::path dir;
  std::ostream* log;
  std::vector<std::pair<std::string, double>> timings;
  bool ok = true;

  void note(const std::string& msg) const {
    if (log) *log << msg << "\n";
  }
};

// Greedy matching stands in for SMATCH; reports say so.
std::string report_label(PrecondKind kind) {
  return kind == PrecondKind::kAmgMatching ? "amg_match (matching approx.)" : to_string(kind);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs the simulation, recording a failure instead of throwing.
SimulationResult simulate(RunContext& ctx, const PrecondConfig& pc, const std::string& label,
                          std::string* failure, const IterateObserver& observer = {}) {
  const Discretization disc = ctx.s.discretization();
  const auto t0 = std::chrono::steady_clock::now();
  SimulationResult res;
  try {
    res = run_simulation(disc, ctx.s.newton, pc, observer);
  } catch (const NewtonFailure& e) {
    res.stats = e.stats;
    *failure = e.what();
  }
  if (failure->empty() && !res.stats.all_linear_converged)
    *failure = "a linear solve did not converge";
  ctx.timings.emplace_back(label, seconds_since(t0));
  if (!failure->empty()) {
    ctx.ok = false;
    ctx.note(label + ": " + *failure);
  }
  return res;
}

void write_newton_records(const RunContext& ctx, const std::string& file, const NewtonStats& st) {
  Csv csv(ctx.dir / file, ctx.s,
          "step,r,local,rebuilt,reasons,linear_iterations,linear_converged,linear_contract,"
          "lambda,backtracks,phi_norm");
  for (const auto& rec : st.records)
    csv.row(rec.step, rec.r, rec.local, rec.rebuilt ? 1 : 0,
            rec.reasons ? describe(rec.reasons) : std::string("-"), rec.linear_iterations,
            rec.linear_converged ? 1 : 0, num(rec.linear_contract, 6), num(rec.lambda, 6),
            rec.backtracks, num(rec.phi_norm, 8));
}

void write_summary(const RunContext& ctx, const std::vector<std::string>& lines) {
  std::ofstream out(ctx.dir / "summary.txt");
  out << "# " << provenance(ctx.s) << "\n";
  for (const auto& l : lines) out << l << "\n";
  out << "status: " << (ctx.ok ? "converged" : "failed") << "\n";
}

std::vector<std::string> stats_lines(const NewtonStats& st) {
  return {"time_steps: " + std::to_string(st.time_steps),
          "nonlinear_iterations: " + std::to_string(st.nonlinear_iterations),
          "jacobians: " + std::to_string(st.jacobians),
          "linear_iterations: " + std::to_string(st.linear_iterations),
          "avg_linear_per_newton_step: " + num(st.average_linear_per_step(), 6),
          "backtracks: " + std::to_string(st.backtracks),
          "worst_linear_contract: " + num(st.worst_linear_contract, 6)};
}

void run_simulate(RunContext& ctx) {
  std::string failure;
  const SimulationResult res = simulate(ctx, ctx.s.precond, to_string(ctx.s.precond.kind), &failure);
  write_newton_records(ctx, "newton_iterations.csv", res.stats);

  Csv steps(ctx.dir / "time_steps.csv", ctx.s,
            "step,newton_iterations,linear_iterations,linear_per_newton,min_p,max_p");
  std::map<int, std::pair<int, int>> per_step;
  for (const auto& rec : res.stats.records) {
    per_step[rec.step].first += 1;
    per_step[rec.step].second += rec.linear_iterations;
  }
  for (std::size_t l = 0; l < res.trajectory.size(); ++l) {
    const int step = static_cast<int>(l) + 1;
    const auto [nl, lin] = per_step[step];
    steps.row(step, nl, lin, num(nl ? double(lin) / nl : 0.0, 6),
              num(res.trajectory[l].minCoeff(), 10), num(res.trajectory[l].maxCoeff(), 10));
  }

  if (ctx.s.dimension == 1) {
    const ProblemGrid grid = ctx.s.grid();
    std::string header = "z,p0";
    for (std::size_t l = 1; l <= res.trajectory.size(); ++l) header += ",p" + std::to_string(l);
    Csv prof(ctx.dir / "profiles.csv", ctx.s, header);
    const Field p0 = initial_field(grid, ctx.s.boundary);
    for (Eigen::Index i = 0; i < p0.size(); ++i) {
      std::ostringstream line;
      line << num(grid.position(0, 0, static_cast<int>(i) + 1)[2], 10) << "," << num(p0[i], 12);
      for (const Field& p : res.trajectory) line << "," << num(p[i], 12);
      prof.row(line.str());
    }
  }
  auto lines = stats_lines(res.stats);
  lines.insert(lines.begin(), "preconditioner: " + report_label(ctx.s.precond.kind));
  if (!failure.empty()) lines.push_back("failure: " + failure);
  write_summary(ctx, lines);
}

void run_spectrum(RunContext& ctx) {
  const Discretization disc = ctx.s.discretization();
  const ProblemGrid& grid = disc.grid();
  const std::set<IteratePair> wanted(ctx.s.spectrum_pairs.begin(), ctx.s.spectrum_pairs.end());
  std::set<IteratePair> found;
  Csv summary(ctx.dir / "spectrum_summary.csv", ctx.s,
              "step,iterate,n,distance,max_imag,max_real,transport_norm,transport_bound,"
              "transport_pass");
  const int n_theta = ctx.s.n_theta > 0 ? ctx.s.n_theta : static_cast<int>(grid.size());
  const double h2 = grid.hz() * grid.hz();

  auto observer = [&](int step, int local, const Vector& p) {
    const IteratePair at{step, local};
    if (!wanted.count(at)) return;
    found.insert(at);
    const EigDistribution eigs = eigenvalues_tridiagonal(SparseMatrix(h2 * jacobian(disc, p)));
    const SymbolGrid sym = sample_symbol(disc, p, n_theta);
    const Eigen::VectorXd q = matched_quantiles(eigs, sym);
    const ZeroDistribution z = zero_distribution_check(disc, p);
    Csv pairs(ctx.dir / ("eigs_symbol_step" + std::to_string(step) + "_iter" +
                         std::to_string(local) + ".csv"),
              ctx.s, "k,eigenvalue,symbol_quantile");
    for (Eigen::Index k = 0; k < q.size(); ++k)
      pairs.row(k, num(eigs.real[k], 15), num(q[k], 15));
    summary.row(step, local, eigs.dimension, num(distribution_distance(eigs, sym), 6),
                num(eigs.max_imag, 6), num(eigs.real.maxCoeff(), 10), num(z.norm, 8),
                num(z.bound, 8), z.pass ? 1 : 0);
  };
  std::string failure;
  const SimulationResult res =
      simulate(ctx, ctx.s.precond, to_string(ctx.s.precond.kind), &failure, observer);
  write_newton_records(ctx, "newton_iterations.csv", res.stats);

  auto lines = stats_lines(res.stats);
  std::string missing;
  for (const auto& p : wanted)
    if (!found.count(p))
      missing += (missing.empty() ? "" : " ") + std::to_string(p.step) + ":" +
                 std::to_string(p.iterate);
  lines.push_back("recorded_pairs: " + std::to_string(found.size()));
  if (!missing.empty()) lines.push_back("unreached_pairs: " + missing);
  if (!failure.empty()) lines.push_back("failure: " + failure);
  write_summary(ctx, lines);
}

void run_sweep(RunContext& ctx) {
  Csv table(ctx.dir / "precond_sweep.csv", ctx.s,
            "preconditioner,label,nonlinear_iterations,jacobians,linear_iterations,"
            "avg_linear_per_newton_step,backtracks,converged");
  std::vector<std::string> lines;
  for (PrecondKind kind : ctx.s.sweep) {
    PrecondConfig pc = ctx.s.precond;
    pc.kind = kind;
    std::string failure;
    const SimulationResult res = simulate(ctx, pc, to_string(kind), &failure);
    const NewtonStats& st = res.stats;
    table.row(to_string(kind), report_label(kind), st.nonlinear_iterations, st.jacobians, st.linear_iterations,
              num(st.average_linear_per_step(), 6), st.backtracks, failure.empty() ? 1 : 0);
    write_newton_records(ctx, "newton_iterations_" + to_string(kind) + ".csv", st);
    lines.push_back(report_label(kind) + ": nonlinear " + std::to_string(st.nonlinear_iterations) +
                    ", jacobians " + std::to_string(st.jacobians) + ", avg linear " +
                    num(st.average_linear_per_step(), 6) +
                    (failure.empty() ? "" : ", failed: " + failure));
  }
  write_summary(ctx, lines);
}

void run_as_equivalence(RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  AsEquivalenceTable t;
  std::string failure;
  try {
    t = as_equivalence_experiment(ctx.s.discretization(), ctx.s.newton, ctx.s.precond);
  } catch (const NewtonFailure& e) {
    failure = e.what();
    ctx.ok = false;
    ctx.note("as_equivalence: " + failure);
  }
  ctx.timings.emplace_back("as_equivalence", seconds_since(t0));
  if (!t.full_stats.all_linear_converged || !t.diffusion_stats.all_linear_converged) ctx.ok = false;
  Csv table(ctx.dir / "as_equivalence.csv", ctx.s, "step,as_full_jacobian,as_diffusion,identity");
  for (const auto& row : t.rows)
    table.row(row.step, num(row.full, 6), num(row.diffusion, 6), num(row.identity, 6));
  table.row("mean", num(t.full, 6), num(t.diffusion, 6), num(t.identity, 6));
  std::vector<std::string> lines = {"as_full_jacobian: " + num(t.full, 6),
                                    "as_diffusion: " + num(t.diffusion, 6),
                                    "identity: " + num(t.identity, 6),
                                    "relative_gap: " + num(t.relative_gap(), 6),
                                    "identity_linear_converged: " +
                                        std::to_string(t.identity_stats.all_linear_converged ? 1 : 0)};
  if (!failure.empty()) lines.push_back("failure: " + failure);
  write_summary(ctx, lines);
}

std::filesystem::path prepare_dir(const Scenario& s, const RunOptions& options) {
  std::filesystem::path dir = options.output_dir.empty() ? s.output_dir : options.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

int run_scenario(const Scenario& s, const RunOptions& options) {
  if (options.threads < 1) throw std::invalid_argument("run: threads must be >= 1");
  RunContext ctx{s, prepare_dir(s, options), options.log, {}, true};
  switch (s.experiment) {
    case ExperimentKind::kSimulate1d:
    case ExperimentKind::kSimulate3d:
      run_simulate(ctx);
      break;
    case ExperimentKind::kSpectrum1d:
      run_spectrum(ctx);
      break;
    case ExperimentKind::kPrecondSweep:
      run_sweep(ctx);
      break;
    case ExperimentKind::kAsEquivalence:
      run_as_equivalence(ctx);
      break;
  }
  // Wall-clock data lives apart from the deterministic outputs.
  Csv timing(ctx.dir / "timing.csv", s, "run,seconds");
  for (const auto& [label, secs] : ctx.timings) timing.row(label, num(secs, 6));
  return ctx.ok ? 0 : 1;
}

std::string export_matrix(const Scenario& s, IteratePair at, const RunOptions& options) {
  struct Reached {};
  const Discretization disc = s.discretization();
  SparseMatrix J;
  try {
    run_simulation(disc, s.newton, s.precond, [&](int step, int local, const Vector& p) {
      if (step == at.step && local == at.iterate) {
        J = jacobian(disc, p);
        throw Reached{};
      }
    });
  } catch (const Reached&) {
  }
  if (J.rows() == 0)
    throw std::runtime_error("export-matrix: the run never reaches step " +
                             std::to_string(at.step) + ", iterate " + std::to_string(at.iterate));
  const std::filesystem::path path =
      prepare_dir(s, options) /
      ("jacobian_step" + std::to_string(at.step) + "_iter" + std::to_string(at.iterate) + ".mtx");
  write_matrix_market(path.string(), J, provenance(s));
  return path.string();
}

}  // namespace richards
