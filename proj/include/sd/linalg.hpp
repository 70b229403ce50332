#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sd {

using Vector = std::vector<double>;

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compressed-row sparse matrix with sorted, unique column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols),
                                     row_offsets_(rows + 1, 0) {}

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::vector<std::array<double, 3>>&& ijv);
  static SparseMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const int> row_offsets() const { return row_offsets_; }
  std::span<const int> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  double entry_sum() const;
  double coeff(int r, int c) const;  // 0 if not stored

  Vector multiply(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> x) const;
  SparseMatrix transpose() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<int> row_offsets_;
  std::vector<int> col_indices_;
  std::vector<double> values_;
  friend SparseMatrix axpy_compose(
      std::span<const std::pair<double, const SparseMatrix*>> terms);
};

/// Entrywise linear combination over the union sparsity pattern.
SparseMatrix axpy_compose(
    std::span<const std::pair<double, const SparseMatrix*>> terms);
inline SparseMatrix axpy_compose(
    std::initializer_list<std::pair<double, const SparseMatrix*>> terms) {
  return axpy_compose(std::span<const std::pair<double, const SparseMatrix*>>(
      terms.begin(), terms.size()));
}

/// Sparse LU with a relative residual guarantee of 1e-9 on every solve
/// (one refinement pass is attempted before giving up).
class LuSolver {
 public:
  explicit LuSolver(const SparseMatrix& a);
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;

  Vector solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Square system assembled from named blocks over solution groups.
/// Missing blocks are zero. Groups are ordered as registered.
class BlockSystem {
 public:
  int add_group(const std::string& name, int size);  // returns group id
  void set_block(int row_group, int col_group, SparseMatrix block);
  void set_rhs(int group, Vector rhs);

  int group_count() const { return static_cast<int>(sizes_.size()); }
  int group_size(int g) const { return sizes_[g]; }
  int offset(int g) const { return offsets_[g]; }
  int total_size() const { return total_; }

  SparseMatrix flatten() const;
  Vector flat_rhs() const;
  std::vector<Vector> split(std::span<const double> flat) const;

 private:
  std::vector<std::string> names_;
  std::vector<int> sizes_, offsets_;
  int total_ = 0;
  std::map<std::pair<int, int>, SparseMatrix> blocks_;
  std::vector<Vector> rhs_;
};

/// Factor + solve + residual check in one shot; per-group solutions.
std::vector<Vector> solve_direct(const BlockSystem& system);

/// Square system with some unknowns pinned to given values. The pinned rows
/// and columns are deleted symmetrically; column contributions move to the
/// right-hand side at solve time. The factorization is reusable across
/// right-hand sides and boundary values.
class ConstrainedSystem {
 public:
  ConstrainedSystem(const SparseMatrix& a, std::span<const int> constrained);

  // full_rhs has full dimension; constrained_values aligns with the
  // constrained id list. Returns the full-length solution.
  Vector solve(std::span<const double> full_rhs,
               std::span<const double> constrained_values) const;

  int full_size() const { return full_size_; }

 private:
  int full_size_ = 0;
  std::vector<int> constrained_;      // sorted
  std::vector<int> free_of_full_;     // -1 for constrained entries
  std::vector<int> full_of_free_;
  SparseMatrix a_ff_, a_fc_;
  std::unique_ptr<LuSolver> lu_;
};

// Small dense-vector helpers shared by the steppers.
Vector vec_combine(double alpha, std::span<const double> x, double beta,
                   std::span<const double> y);
void vec_axpy_inplace(Vector& y, double alpha, std::span<const double> x);
double vec_inf_norm(std::span<const double> x);

}  // namespace sd
