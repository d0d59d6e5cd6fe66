#pragma once

#include <memory>
#include <string>

#include "richards/grid.hpp"
#include "richards/krylov.hpp"
#include "richards/precond/amg.hpp"
#include "richards/precond/schwarz.hpp"

namespace richards {

enum class PrecondKind { kNone, kIlu0, kBlockJacobi, kAdditiveSchwarz, kAmgVmb, kAmgMatching };

std::string to_string(PrecondKind kind);
PrecondKind precond_kind_from_string(const std::string& name);

struct PrecondConfig {
  PrecondKind kind = PrecondKind::kIlu0;
  /// Subdomain blocks along x and y (line grids use blocks_x * blocks_y
  /// contiguous ranges).
  int blocks_x = 2;
  int blocks_y = 2;
  int overlap = 1;
  AmgOptions amg;
  /// Build on the full Jacobian instead of the diffusion-only matrix.
  bool on_full_jacobian = false;
};

/// Preconditioner bound to one operator. refresh() is called whenever the
/// Newton driver assembles a new Jacobian: one-level methods refactor,
/// AMG keeps its hierarchy and only swaps the finest smoother.
class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Vector apply(const Vector& r) const = 0;
  virtual void refresh(const SparseMatrix& A) = 0;
  virtual std::string name() const = 0;

  PreconditionerApply action() const {
    return [this](const Vector& r) { return apply(r); };
  }
};

std::unique_ptr<Preconditioner> make_preconditioner(const PrecondConfig& config,
                                                    const SparseMatrix& A,
                                                    const ProblemGrid& grid);

}  // namespace richards
