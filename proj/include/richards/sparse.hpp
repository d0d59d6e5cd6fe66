#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace richards {

/// Compressed sparse row storage. Column indices are kept sorted and unique
/// within each row (makeCompressed + setFromTriplets guarantee this).
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;

/// y = A x. Throws std::invalid_argument on a dimension mismatch.
Vector spmv(const SparseMatrix& A, const Vector& x);

/// Galerkin product P^T A P with the sparsity of the symbolic product.
SparseMatrix triple_product(const SparseMatrix& P, const SparseMatrix& A);

/// Same row offsets and column indices (values ignored).
bool same_pattern(const SparseMatrix& A, const SparseMatrix& B);

/// Checks the storage invariants: compressed, monotone offsets, sorted and
/// unique column indices.
bool is_well_formed(const SparseMatrix& A);

SparseMatrix identity_matrix(Eigen::Index n);

// Matrix Market coordinate (real general) and plain vector text formats.
void write_matrix_market(std::ostream& os, const SparseMatrix& A,
                         const std::string& comment = {});
void write_matrix_market(const std::string& path, const SparseMatrix& A,
                         const std::string& comment = {});
SparseMatrix read_matrix_market(std::istream& is);
SparseMatrix read_matrix_market(const std::string& path);

void write_vector(std::ostream& os, const Vector& v);
Vector read_vector(std::istream& is);

}  // namespace richards
