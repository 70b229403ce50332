#include "sd/linalg.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>

namespace sd {

SparseMatrix SparseMatrix::from_triplets(
    int rows, int cols, std::vector<std::array<double, 3>>&& ijv) {
  SparseMatrix m(rows, cols);
  std::sort(ijv.begin(), ijv.end(), [](const auto& a, const auto& b) {
    if (a[0] != b[0]) return a[0] < b[0];
    return a[1] < b[1];
  });
  m.col_indices_.reserve(ijv.size());
  m.values_.reserve(ijv.size());
  size_t i = 0;
  for (int r = 0; r < rows; ++r) {
    while (i < ijv.size() && static_cast<int>(ijv[i][0]) == r) {
      const int c = static_cast<int>(ijv[i][1]);
      double v = ijv[i][2];
      ++i;
      while (i < ijv.size() && static_cast<int>(ijv[i][0]) == r &&
             static_cast<int>(ijv[i][1]) == c) {
        v += ijv[i][2];
        ++i;
      }
      m.col_indices_.push_back(c);
      m.values_.push_back(v);
    }
    m.row_offsets_[r + 1] = static_cast<int>(m.col_indices_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<std::array<double, 3>> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({double(i), double(i), 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::entry_sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double SparseMatrix::coeff(int r, int c) const {
  for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
    if (col_indices_[k] == c) return values_[k];
  return 0.0;
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
  Vector y(rows_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      s += values_[k] * x[col_indices_[k]];
    y[r] = s;
  }
  return y;
}

Vector SparseMatrix::multiply_transpose(std::span<const double> x) const {
  Vector y(cols_, 0.0);
  for (int r = 0; r < rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      y[col_indices_[k]] += values_[k] * x[r];
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<std::array<double, 3>> t;
  t.reserve(values_.size());
  for (int r = 0; r < rows_; ++r)
    for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      t.push_back({double(col_indices_[k]), double(r), values_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix axpy_compose(
    std::span<const std::pair<double, const SparseMatrix*>> terms) {
  if (terms.empty()) throw std::invalid_argument("axpy_compose: no terms");
  const int rows = terms[0].second->rows();
  const int cols = terms[0].second->cols();
  std::vector<std::array<double, 3>> t;
  for (const auto& [alpha, m] : terms) {
    if (m->rows() != rows || m->cols() != cols)
      throw std::invalid_argument("axpy_compose: dimension mismatch");
    for (int r = 0; r < rows; ++r)
      for (int k = m->row_offsets_[r]; k < m->row_offsets_[r + 1]; ++k)
        t.push_back({double(r), double(m->col_indices_[k]),
                     alpha * m->values_[k]});
  }
  return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  using T = Eigen::Triplet<double>;
  std::vector<T> trips;
  trips.reserve(a.values().size());
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (int r = 0; r < a.rows(); ++r)
    for (int k = off[r]; k < off[r + 1]; ++k)
      trips.emplace_back(r, col[k], val[k]);
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

struct LuSolver::Impl {
  SparseMatrix a;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

LuSolver::LuSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("LuSolver: matrix must be square");
  const auto off = a.row_offsets();
  const auto val = a.values();
  for (int r = 0; r < a.rows(); ++r) {
    bool nonzero = false;
    for (int k = off[r]; k < off[r + 1] && !nonzero; ++k)
      nonzero = val[k] != 0.0;
    if (!nonzero)
      throw SolverError("singular system: row " + std::to_string(r) +
                        " has no nonzero entries");
  }
  impl_->a = a;
  Eigen::SparseMatrix<double> m = to_eigen(a);
  impl_->lu.analyzePattern(m);
  impl_->lu.factorize(m);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed: " +
                      impl_->lu.lastErrorMessage());
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

Vector LuSolver::solve(std::span<const double> b) const {
  const int n = impl_->a.rows();
  Eigen::VectorXd be(n);
  for (int i = 0; i < n; ++i) be[i] = b[i];
  Eigen::VectorXd xe = impl_->lu.solve(be);
  if (impl_->lu.info() != Eigen::Success)
    throw SolverError("sparse LU solve failed");

  Vector x(xe.data(), xe.data() + n);
  const double bnorm = vec_inf_norm(b);
  auto residual = [&](const Vector& xv) {
    Vector ax = impl_->a.multiply(xv);
    double r = 0.0;
    for (int i = 0; i < n; ++i) r = std::max(r, std::abs(ax[i] - b[i]));
    return r;
  };
  const double tol = 1e-9 * std::max(bnorm, 1e-300);
  if (residual(x) > tol) {
    // One pass of iterative refinement.
    Vector ax = impl_->a.multiply(x);
    Eigen::VectorXd re(n);
    for (int i = 0; i < n; ++i) re[i] = b[i] - ax[i];
    Eigen::VectorXd de = impl_->lu.solve(re);
    for (int i = 0; i < n; ++i) x[i] += de[i];
    if (residual(x) > tol)
      throw SolverError("solve residual exceeds 1e-9 relative tolerance");
  }
  return x;
}

int BlockSystem::add_group(const std::string& name, int size) {
  names_.push_back(name);
  offsets_.push_back(total_);
  sizes_.push_back(size);
  rhs_.emplace_back(size, 0.0);
  total_ += size;
  return static_cast<int>(sizes_.size()) - 1;
}

void BlockSystem::set_block(int rg, int cg, SparseMatrix block) {
  if (block.rows() != sizes_[rg] || block.cols() != sizes_[cg])
    throw std::invalid_argument("BlockSystem: block dimensions inconsistent");
  blocks_[{rg, cg}] = std::move(block);
}

void BlockSystem::set_rhs(int group, Vector rhs) {
  if (static_cast<int>(rhs.size()) != sizes_[group])
    throw std::invalid_argument("BlockSystem: rhs size inconsistent");
  rhs_[group] = std::move(rhs);
}

SparseMatrix BlockSystem::flatten() const {
  std::vector<std::array<double, 3>> t;
  for (const auto& [key, m] : blocks_) {
    const int r0 = offsets_[key.first];
    const int c0 = offsets_[key.second];
    const auto off = m.row_offsets();
    const auto col = m.col_indices();
    const auto val = m.values();
    for (int r = 0; r < m.rows(); ++r)
      for (int k = off[r]; k < off[r + 1]; ++k)
        t.push_back({double(r0 + r), double(c0 + col[k]), val[k]});
  }
  return SparseMatrix::from_triplets(total_, total_, std::move(t));
}

Vector BlockSystem::flat_rhs() const {
  Vector b(total_, 0.0);
  for (int g = 0; g < group_count(); ++g)
    std::copy(rhs_[g].begin(), rhs_[g].end(), b.begin() + offsets_[g]);
  return b;
}

std::vector<Vector> BlockSystem::split(std::span<const double> flat) const {
  std::vector<Vector> out;
  out.reserve(group_count());
  for (int g = 0; g < group_count(); ++g)
    out.emplace_back(flat.begin() + offsets_[g],
                     flat.begin() + offsets_[g] + sizes_[g]);
  return out;
}

std::vector<Vector> solve_direct(const BlockSystem& system) {
  LuSolver lu(system.flatten());
  return system.split(lu.solve(system.flat_rhs()));
}

ConstrainedSystem::ConstrainedSystem(const SparseMatrix& a,
                                     std::span<const int> constrained)
    : full_size_(a.rows()), constrained_(constrained.begin(), constrained.end()) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("ConstrainedSystem: matrix must be square");
  std::sort(constrained_.begin(), constrained_.end());
  constrained_.erase(std::unique(constrained_.begin(), constrained_.end()),
                     constrained_.end());

  free_of_full_.assign(full_size_, -1);
  std::vector<int> pos_of_constrained(full_size_, -1);
  {
    size_t ci = 0;
    for (int i = 0; i < full_size_; ++i) {
      if (ci < constrained_.size() && constrained_[ci] == i) {
        pos_of_constrained[i] = static_cast<int>(ci);
        ++ci;
      } else {
        free_of_full_[i] = static_cast<int>(full_of_free_.size());
        full_of_free_.push_back(i);
      }
    }
  }

  std::vector<std::array<double, 3>> tff, tfc;
  const auto off = a.row_offsets();
  const auto col = a.col_indices();
  const auto val = a.values();
  for (int r = 0; r < full_size_; ++r) {
    const int fr = free_of_full_[r];
    if (fr < 0) continue;
    for (int k = off[r]; k < off[r + 1]; ++k) {
      const int c = col[k];
      if (free_of_full_[c] >= 0)
        tff.push_back({double(fr), double(free_of_full_[c]), val[k]});
      else
        tfc.push_back({double(fr), double(pos_of_constrained[c]), val[k]});
    }
  }
  const int nf = static_cast<int>(full_of_free_.size());
  const int nc = static_cast<int>(constrained_.size());
  a_ff_ = SparseMatrix::from_triplets(nf, nf, std::move(tff));
  a_fc_ = SparseMatrix::from_triplets(nf, nc, std::move(tfc));
  lu_ = std::make_unique<LuSolver>(a_ff_);
}

Vector ConstrainedSystem::solve(std::span<const double> full_rhs,
                                std::span<const double> constrained_values) const {
  if (static_cast<int>(full_rhs.size()) != full_size_ ||
      constrained_values.size() != constrained_.size())
    throw std::invalid_argument("ConstrainedSystem::solve: size mismatch");
  Vector b(full_of_free_.size());
  for (size_t i = 0; i < full_of_free_.size(); ++i)
    b[i] = full_rhs[full_of_free_[i]];
  const Vector correction = a_fc_.multiply(constrained_values);
  for (size_t i = 0; i < b.size(); ++i) b[i] -= correction[i];

  const Vector xf = lu_->solve(b);
  Vector x(full_size_, 0.0);
  for (size_t i = 0; i < full_of_free_.size(); ++i) x[full_of_free_[i]] = xf[i];
  for (size_t i = 0; i < constrained_.size(); ++i)
    x[constrained_[i]] = constrained_values[i];
  return x;
}

Vector vec_combine(double alpha, std::span<const double> x, double beta,
                   std::span<const double> y) {
  Vector out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + beta * y[i];
  return out;
}

void vec_axpy_inplace(Vector& y, double alpha, std::span<const double> x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double vec_inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace sd
