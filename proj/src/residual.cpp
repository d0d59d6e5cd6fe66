#include "richards/residual.hpp"

#include <utility>

namespace richards {

std::string to_string(AverageKind kind) {
  switch (kind) {
    case AverageKind::kArithmetic:
      return "arithmetic";
    case AverageKind::kGeometric:
      return "geometric";
    case AverageKind::kUpstream:
      return "upstream";
    case AverageKind::kIntegral:
      return "integral";
  }
  return "unknown";
}

AverageKind average_kind_from_string(const std::string& name) {
  if (name == "arithmetic") return AverageKind::kArithmetic;
  if (name == "geometric") return AverageKind::kGeometric;
  if (name == "upstream") return AverageKind::kUpstream;
  if (name == "integral") return AverageKind::kIntegral;
  throw std::invalid_argument("unknown average kind '" + name + "'");
}

namespace {

Discretization::Options default_options(const ProblemGrid& grid) {
  Discretization::Options opt;
  opt.include_rho_phi = !grid.is_line();
  return opt;
}

}  // namespace

Discretization::Discretization(ProblemGrid grid, BoundarySpec boundary,
                               VanGenuchtenParams params, AverageKind average)
    : Discretization(grid, boundary, params, average, default_options(grid)) {}

Discretization::Discretization(ProblemGrid grid, BoundarySpec boundary,
                               VanGenuchtenParams params, AverageKind average,
                               Options options)
    : Discretization(grid, boundary_frame(grid, boundary), params, average,
                     std::move(options)) {
  boundary_ = boundary;
}

Discretization::Discretization(ProblemGrid grid, Eigen::VectorXd frame,
                               VanGenuchtenParams params, AverageKind average,
                               Options options)
    : grid_(std::move(grid)),
      params_(params),
      average_(average),
      frame_(std::move(frame)),
      source_(std::move(options.source)) {
  params_.validate();
  const auto& n = grid_.nodes();
  const Eigen::Index nodes =
      grid_.is_line() ? n[2] : static_cast<Eigen::Index>(n[0]) * n[1] * n[2];
  if (frame_.size() != nodes)
    throw std::invalid_argument("discretization: boundary frame size mismatch");
  if (source_.size() != 0 && source_.size() != grid_.size())
    throw std::invalid_argument("discretization: source size mismatch");
  time_coef_ = options.include_rho_phi ? params_.rho_phi() : 1.0;
}

std::array<Eigen::Index, 3> Discretization::strides() const {
  if (grid_.is_line()) return {0, 0, 1};
  const auto& n = grid_.nodes();
  return {1, n[0], static_cast<Eigen::Index>(n[0]) * n[1]};
}

Eigen::Index Discretization::full_index(Eigen::Index m) const {
  const auto node = grid_.node_of(m);
  if (grid_.is_line()) return node[2];
  const auto& n = grid_.nodes();
  return (static_cast<Eigen::Index>(node[2]) * n[1] + node[1]) * n[0] + node[0];
}

Field residual_3d(const Field& p_new, const Field& p_old,
                  const ProblemGrid& grid, const BoundarySpec& spec,
                  const VanGenuchtenParams& params, AverageKind kind,
                  const Field& source) {
  if (grid.is_line())
    throw std::invalid_argument("residual_3d: grid is one-dimensional");
  Discretization::Options opt;
  opt.include_rho_phi = true;
  opt.source = source;
  return Discretization(grid, spec, params, kind, opt).residual(p_new, p_old);
}

Field residual_1d(const Field& p_new, const Field& p_old,
                  const ProblemGrid& grid, const BoundarySpec& spec,
                  const VanGenuchtenParams& params, AverageKind kind,
                  bool include_rho_phi) {
  if (!grid.is_line())
    throw std::invalid_argument("residual_1d: grid is not one-dimensional");
  Discretization::Options opt;
  opt.include_rho_phi = include_rho_phi;
  return Discretization(grid, spec, params, kind, opt).residual(p_new, p_old);
}

}  // namespace richards
