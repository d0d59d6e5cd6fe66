#include "richards/precond/preconditioner.hpp"

#include <stdexcept>

namespace richards {

std::string to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::kNone:
      return "none";
    case PrecondKind::kIlu0:
      return "ilu0";
    case PrecondKind::kBlockJacobi:
      return "bjac";
    case PrecondKind::kAdditiveSchwarz:
      return "as";
    case PrecondKind::kAmgVmb:
      return "amg_vmb";
    case PrecondKind::kAmgMatching:
      return "amg_match";
  }
  return "unknown";
}

PrecondKind precond_kind_from_string(const std::string& name) {
  for (PrecondKind k : {PrecondKind::kNone, PrecondKind::kIlu0, PrecondKind::kBlockJacobi,
                        PrecondKind::kAdditiveSchwarz, PrecondKind::kAmgVmb,
                        PrecondKind::kAmgMatching})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown preconditioner '" + name + "'");
}

namespace {

class IdentityPrec final : public Preconditioner {
 public:
  Vector apply(const Vector& r) const override { return r; }
  void refresh(const SparseMatrix&) override {}
  std::string name() const override { return "none"; }
};

class Ilu0Prec final : public Preconditioner {
 public:
  explicit Ilu0Prec(const SparseMatrix& A) : ilu_(A) {}
  Vector apply(const Vector& r) const override { return ilu_.solve(r); }
  void refresh(const SparseMatrix& A) override { ilu_ = Ilu0(A); }
  std::string name() const override { return "ilu0"; }

 private:
  Ilu0 ilu_;
};

class SchwarzPrec final : public Preconditioner {
 public:
  SchwarzPrec(const SparseMatrix& A, SubdomainPartition part, std::string label)
      : as_(A, std::move(part)), label_(std::move(label)) {}
  Vector apply(const Vector& r) const override { return as_.apply(r); }
  void refresh(const SparseMatrix& A) override { as_.update(A); }
  std::string name() const override { return label_; }

 private:
  AdditiveSchwarz as_;
  std::string label_;
};

class AmgPrec final : public Preconditioner {
 public:
  AmgPrec(const SparseMatrix& A, const AmgOptions& opt) : amg_(A, opt) {}
  Vector apply(const Vector& r) const override { return amg_.apply(r); }
  void refresh(const SparseMatrix& A) override { amg_.update_smoothers(A); }
  std::string name() const override {
    return "amg_" + to_string(amg_.options().aggregation);
  }
  const AmgHierarchy& hierarchy() const { return amg_; }

 private:
  AmgHierarchy amg_;
};

}  // namespace

std::unique_ptr<Preconditioner> make_preconditioner(const PrecondConfig& config,
                                                    const SparseMatrix& A,
                                                    const ProblemGrid& grid) {
  switch (config.kind) {
    case PrecondKind::kNone:
      return std::make_unique<IdentityPrec>();
    case PrecondKind::kIlu0:
      return std::make_unique<Ilu0Prec>(A);
    case PrecondKind::kBlockJacobi:
      return std::make_unique<SchwarzPrec>(
          A, grid_partition(grid, config.blocks_x, config.blocks_y), "bjac");
    case PrecondKind::kAdditiveSchwarz:
      return std::make_unique<SchwarzPrec>(
          A,
          with_overlap(grid_partition(grid, config.blocks_x, config.blocks_y), A,
                       config.overlap),
          "as");
    case PrecondKind::kAmgVmb: {
      AmgOptions opt = config.amg;
      opt.aggregation = AggregationKind::kVmb;
      return std::make_unique<AmgPrec>(A, opt);
    }
    case PrecondKind::kAmgMatching: {
      AmgOptions opt = config.amg;
      opt.aggregation = AggregationKind::kMatching;
      return std::make_unique<AmgPrec>(A, opt);
    }
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

}  // namespace richards
