#include "inlite/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "inlite/error.hpp"

namespace inlite {

namespace {

std::uint64_t hash_pattern(int dim, std::span<const int> col_ptr, std::span<const int> rows) {
  // FNV-1a over the dimension and both index arrays.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(dim));
  for (int p : col_ptr) mix(static_cast<std::uint64_t>(p));
  for (int r : rows) mix(static_cast<std::uint64_t>(r));
  return h;
}

}  // namespace

SparsePrecision SparsePrecision::from_triplets(int dim, std::span<const Triplet> triplets) {
  if (dim <= 0) throw std::invalid_argument("sparse matrix dimension must be positive");
  std::vector<Triplet> upper;
  upper.reserve(triplets.size());
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= dim || t.col >= dim) {
      throw std::out_of_range("triplet (" + std::to_string(t.row) + ", " +
                              std::to_string(t.col) + ") outside dimension " +
                              std::to_string(dim));
    }
    upper.push_back(t.row <= t.col ? t : Triplet{t.col, t.row, t.value});
  }
  std::sort(upper.begin(), upper.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });

  auto pattern = std::make_shared<Pattern>();
  pattern->col_ptr.assign(static_cast<std::size_t>(dim) + 1, 0);
  SparsePrecision out;
  out.dim_ = dim;
  for (std::size_t k = 0; k < upper.size(); ++k) {
    if (k > 0 && upper[k].row == upper[k - 1].row && upper[k].col == upper[k - 1].col) {
      out.values_.back() += upper[k].value;
      continue;
    }
    pattern->row_index.push_back(upper[k].row);
    out.values_.push_back(upper[k].value);
    ++pattern->col_ptr[static_cast<std::size_t>(upper[k].col) + 1];
  }
  for (int j = 0; j < dim; ++j) pattern->col_ptr[j + 1] += pattern->col_ptr[j];
  out.pattern_ = std::move(pattern);
  return out;
}

SparsePrecision SparsePrecision::identity(int dim, double scale) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(std::max(dim, 0)));
  for (int i = 0; i < dim; ++i) t.push_back({i, i, scale});
  return from_triplets(dim, t);
}

std::size_t SparsePrecision::nonzeros() const {
  std::size_t diag = 0;
  for (int j = 0; j < dim_; ++j) {
    for (int p = pattern_->col_ptr[j]; p < pattern_->col_ptr[j + 1]; ++p) {
      if (pattern_->row_index[p] == j) ++diag;
    }
  }
  return 2 * values_.size() - diag;
}

std::ptrdiff_t SparsePrecision::find(int row, int col) const {
  if (row > col) std::swap(row, col);
  if (row < 0 || col >= dim_) return -1;
  const auto begin = pattern_->row_index.begin() + pattern_->col_ptr[col];
  const auto end = pattern_->row_index.begin() + pattern_->col_ptr[col + 1];
  const auto it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) return -1;
  return it - pattern_->row_index.begin();
}

double SparsePrecision::operator()(int row, int col) const {
  const std::ptrdiff_t p = find(row, col);
  return p < 0 ? 0.0 : values_[static_cast<std::size_t>(p)];
}

SparsePrecision SparsePrecision::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) {
    throw std::invalid_argument("with_values: expected " + std::to_string(values_.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  SparsePrecision out;
  out.dim_ = dim_;
  out.pattern_ = pattern_;
  out.values_ = std::move(values);
  return out;
}

DenseVector SparsePrecision::multiply(const DenseVector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("multiply: length mismatch");
  DenseVector y = DenseVector::Zero(dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int p = pattern_->col_ptr[j]; p < pattern_->col_ptr[j + 1]; ++p) {
      const int i = pattern_->row_index[p];
      const double v = values_[p];
      y[i] += v * x[j];
      if (i != j) y[j] += v * x[i];
    }
  }
  return y;
}

double SparsePrecision::quadratic_form(const DenseVector& x) const {
  return x.dot(multiply(x));
}

Eigen::MatrixXd SparsePrecision::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    for (int p = pattern_->col_ptr[j]; p < pattern_->col_ptr[j + 1]; ++p) {
      const int i = pattern_->row_index[p];
      d(i, j) = values_[p];
      d(j, i) = values_[p];
    }
  }
  return d;
}

std::vector<Triplet> SparsePrecision::to_triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (int j = 0; j < dim_; ++j) {
    for (int p = pattern_->col_ptr[j]; p < pattern_->col_ptr[j + 1]; ++p) {
      out.push_back({pattern_->row_index[p], j, values_[p]});
    }
  }
  return out;
}

std::uint64_t SparsePrecision::pattern_hash() const {
  return hash_pattern(dim_, pattern_->col_ptr, pattern_->row_index);
}

bool SparsePrecision::same_pattern(const SparsePrecision& other) const {
  if (dim_ != other.dim_) return false;
  if (pattern_ == other.pattern_) return true;
  return pattern_->col_ptr == other.pattern_->col_ptr &&
         pattern_->row_index == other.pattern_->row_index;
}

SparsePrecision build_sparse(std::span<const Triplet> triplets, int dim) {
  return SparsePrecision::from_triplets(dim, triplets);
}

SparsePrecision add_diag(const SparsePrecision& q, const DenseVector& c) {
  if (c.size() != q.dim()) {
    throw std::invalid_argument("add_diag: vector length " + std::to_string(c.size()) +
                                " does not match dimension " + std::to_string(q.dim()));
  }
  std::vector<double> values(q.values().begin(), q.values().end());
  bool complete = true;
  for (int i = 0; i < q.dim() && complete; ++i) {
    const std::ptrdiff_t p = q.find(i, i);
    if (p < 0) {
      complete = false;
    } else {
      values[static_cast<std::size_t>(p)] += c[i];
    }
  }
  if (complete) return q.with_values(std::move(values));

  std::vector<Triplet> t = q.to_triplets();
  for (int i = 0; i < q.dim(); ++i) t.push_back({i, i, c[i]});
  return SparsePrecision::from_triplets(q.dim(), t);
}

SparsePrecision read_triplets(std::istream& in) {
  int dim = 0;
  long nnz = 0;
  if (!(in >> dim >> nnz) || dim <= 0 || nnz < 0) {
    throw std::invalid_argument("triplet file: bad header, expected 'dim nnz'");
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    Triplet e{};
    if (!(in >> e.row >> e.col >> e.value)) {
      throw std::invalid_argument("triplet file: expected " + std::to_string(nnz) +
                                  " entries, read " + std::to_string(k));
    }
    t.push_back(e);
  }
  return SparsePrecision::from_triplets(dim, t);
}

SparsePrecision read_triplet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open triplet file " + path);
  return read_triplets(in);
}

// ---------------------------------------------------------------------------
// Ordering

std::vector<int> minimum_degree_ordering(const SparsePrecision& q) {
  const int n = q.dim();
  std::vector<std::unordered_set<int>> adj(static_cast<std::size_t>(n));
  const auto cp = q.col_ptr();
  const auto ri = q.row_index();
  for (int j = 0; j < n; ++j) {
    for (int p = cp[j]; p < cp[j + 1]; ++p) {
      const int i = ri[p];
      if (i == j) continue;
      adj[i].insert(j);
      adj[j].insert(i);
    }
  }

  using Entry = std::pair<std::size_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int v = 0; v < n; ++v) heap.push({adj[v].size(), v});

  std::vector<char> eliminated(static_cast<std::size_t>(n), 0);
  std::vector<int> perm;
  perm.reserve(static_cast<std::size_t>(n));
  std::vector<int> nbrs;
  while (!heap.empty()) {
    const auto [deg, v] = heap.top();
    heap.pop();
    if (eliminated[v] || deg != adj[v].size()) continue;
    eliminated[v] = 1;
    perm.push_back(v);

    nbrs.assign(adj[v].begin(), adj[v].end());
    std::sort(nbrs.begin(), nbrs.end());
    for (int u : nbrs) {
      adj[u].erase(v);
      for (int w : nbrs) {
        if (w != u) adj[u].insert(w);
      }
      heap.push({adj[u].size(), u});
    }
    std::unordered_set<int>().swap(adj[v]);
  }
  return perm;
}

// ---------------------------------------------------------------------------
// Symbolic analysis

namespace {

// Nonzero pattern of row k of L, in topological order, written to
// s[top..n-1]. Marks use a stamp array so no clearing pass is needed.
int ereach(int k, std::span<const int> cp, std::span<const int> ci, std::span<const int> parent,
           std::vector<int>& s, std::vector<int>& mark, int stamp) {
  const int n = static_cast<int>(parent.size());
  int top = n;
  mark[k] = stamp;
  for (int p = cp[k]; p < cp[k + 1]; ++p) {
    int i = ci[p];
    if (i > k) continue;
    int len = 0;
    for (; mark[i] != stamp; i = parent[i]) {
      s[len++] = i;
      mark[i] = stamp;
    }
    while (len > 0) s[--top] = s[--len];
  }
  return top;
}

}  // namespace

std::shared_ptr<const SymbolicCholesky> SymbolicCholesky::analyze(const SparsePrecision& q,
                                                                  Ordering ordering) {
  const int n = q.dim();
  if (n <= 0) throw std::invalid_argument("cannot factorize an empty matrix");
  auto sym = std::shared_ptr<SymbolicCholesky>(new SymbolicCholesky());
  sym->dim_ = n;
  sym->pattern_hash_ = q.pattern_hash();

  if (ordering == Ordering::kMinimumDegree) {
    sym->perm_ = minimum_degree_ordering(q);
  } else {
    sym->perm_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sym->perm_[i] = i;
  }
  sym->pinv_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) sym->pinv_[sym->perm_[k]] = k;

  // C = P Q P^T, upper triangle, with the position map from Q.
  const auto qcp = q.col_ptr();
  const auto qri = q.row_index();
  std::vector<int> count(static_cast<std::size_t>(n) + 1, 0);
  for (int j = 0; j < n; ++j) {
    for (int p = qcp[j]; p < qcp[j + 1]; ++p) {
      const int a = sym->pinv_[qri[p]];
      const int b = sym->pinv_[j];
      ++count[std::max(a, b) + 1];
    }
  }
  for (int j = 0; j < n; ++j) count[j + 1] += count[j];
  sym->c_col_ptr_ = count;
  sym->c_row_index_.resize(q.stored_nonzeros());
  sym->q_to_c_.resize(q.stored_nonzeros());
  std::vector<int> next(count.begin(), count.end() - 1);
  for (int j = 0; j < n; ++j) {
    for (int p = qcp[j]; p < qcp[j + 1]; ++p) {
      const int a = sym->pinv_[qri[p]];
      const int b = sym->pinv_[j];
      const int col = std::max(a, b);
      const int dst = next[col]++;
      sym->c_row_index_[dst] = std::min(a, b);
      sym->q_to_c_[p] = dst;
    }
  }

  // Elimination tree of C.
  sym->parent_.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> ancestor(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    for (int p = sym->c_col_ptr_[k]; p < sym->c_col_ptr_[k + 1]; ++p) {
      int i = sym->c_row_index_[p];
      while (i != -1 && i < k) {
        const int inext = ancestor[i];
        ancestor[i] = k;
        if (inext == -1) sym->parent_[i] = k;
        i = inext;
      }
    }
  }

  // Column counts of L by walking every row subtree once.
  std::vector<int> colcount(static_cast<std::size_t>(n), 1);
  std::vector<int> s(static_cast<std::size_t>(n));
  std::vector<int> mark(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    const int top = ereach(k, sym->c_col_ptr_, sym->c_row_index_, sym->parent_, s, mark, k);
    for (int t = top; t < n; ++t) ++colcount[s[t]];
  }
  sym->l_col_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int j = 0; j < n; ++j) sym->l_col_ptr_[j + 1] = sym->l_col_ptr_[j] + colcount[j];
  return sym;
}

// ---------------------------------------------------------------------------
// Numeric factorization (up-looking, row by row)

CholeskyFactor CholeskyFactor::factorize(const SparsePrecision& q,
                                         std::shared_ptr<const SymbolicCholesky> symbolic) {
  if (!symbolic) throw std::invalid_argument("factorize: missing symbolic analysis");
  if (symbolic->dim() != q.dim() || symbolic->pattern_hash() != q.pattern_hash()) {
    throw std::invalid_argument("factorize: symbolic analysis belongs to a different pattern");
  }
  const int n = q.dim();
  CholeskyFactor f;
  f.symbolic_ = std::move(symbolic);
  const SymbolicCholesky& sym = *f.symbolic_;

  std::vector<double> cx(sym.c_row_index_.size());
  const auto qv = q.values();
  for (std::size_t p = 0; p < qv.size(); ++p) cx[sym.q_to_c_[p]] = qv[p];

  const auto& lp = sym.l_col_ptr_;
  f.l_row_index_.resize(static_cast<std::size_t>(lp.back()));
  f.l_values_.resize(static_cast<std::size_t>(lp.back()));
  std::vector<int> fill(lp.begin(), lp.end() - 1);
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  std::vector<int> s(static_cast<std::size_t>(n));
  std::vector<int> mark(static_cast<std::size_t>(n), -1);

  for (int k = 0; k < n; ++k) {
    const int top = ereach(k, sym.c_col_ptr_, sym.c_row_index_, sym.parent_, s, mark, k);
    x[k] = 0.0;
    for (int p = sym.c_col_ptr_[k]; p < sym.c_col_ptr_[k + 1]; ++p) {
      x[sym.c_row_index_[p]] = cx[p];
    }
    double d = x[k];
    x[k] = 0.0;
    for (int t = top; t < n; ++t) {
      const int i = s[t];
      const double lki = x[i] / f.l_values_[lp[i]];
      x[i] = 0.0;
      for (int p = lp[i] + 1; p < fill[i]; ++p) {
        x[f.l_row_index_[p]] -= f.l_values_[p] * lki;
      }
      d -= lki * lki;
      const int p = fill[i]++;
      f.l_row_index_[p] = k;
      f.l_values_[p] = lki;
    }
    if (!(d > 0.0) || !std::isfinite(d)) throw NotPositiveDefinite(k, d);
    const int p = fill[k]++;
    f.l_row_index_[p] = k;
    f.l_values_[p] = std::sqrt(d);
  }
  return f;
}

CholeskyFactor cholesky(const SparsePrecision& q, Ordering ordering) {
  return CholeskyFactor::factorize(q, SymbolicCholesky::analyze(q, ordering));
}

void CholeskyFactor::forward(double* x) const {
  const auto& lp = symbolic_->l_col_ptr_;
  const int n = dim();
  for (int j = 0; j < n; ++j) {
    x[j] /= l_values_[lp[j]];
    const double xj = x[j];
    for (int p = lp[j] + 1; p < lp[j + 1]; ++p) x[l_row_index_[p]] -= l_values_[p] * xj;
  }
}

void CholeskyFactor::backward(double* x) const {
  const auto& lp = symbolic_->l_col_ptr_;
  for (int j = dim() - 1; j >= 0; --j) {
    double acc = x[j];
    for (int p = lp[j] + 1; p < lp[j + 1]; ++p) acc -= l_values_[p] * x[l_row_index_[p]];
    x[j] = acc / l_values_[lp[j]];
  }
}

DenseVector CholeskyFactor::solve(const DenseVector& b) const {
  const int n = dim();
  if (b.size() != n) {
    throw std::invalid_argument("solve: right-hand side has length " + std::to_string(b.size()) +
                                ", expected " + std::to_string(n));
  }
  const auto perm = permutation();
  std::vector<double> work(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) work[k] = b[perm[k]];
  forward(work.data());
  backward(work.data());
  DenseVector x(n);
  for (int k = 0; k < n; ++k) x[perm[k]] = work[k];
  return x;
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != dim()) throw std::invalid_argument("solve: right-hand side row mismatch");
  Eigen::MatrixXd x(b.rows(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) x.col(c) = solve(DenseVector(b.col(c)));
  return x;
}

double CholeskyFactor::log_det() const {
  const auto& lp = symbolic_->l_col_ptr_;
  double acc = 0.0;
  for (int j = 0; j < dim(); ++j) acc += std::log(l_values_[lp[j]]);
  return 2.0 * acc;
}

DenseVector CholeskyFactor::marginal_variances(VarianceMethod method) const {
  const int n = dim();
  const auto perm = permutation();
  DenseVector out(n);
  if (method == VarianceMethod::kUnitSolves) {
    std::vector<double> work(static_cast<std::size_t>(n));
    const auto pinv = symbolic_->inverse_permutation();
    for (int i = 0; i < n; ++i) {
      std::fill(work.begin(), work.end(), 0.0);
      work[pinv[i]] = 1.0;
      forward(work.data());
      backward(work.data());
      out[i] = work[pinv[i]];
    }
    return out;
  }

  // Selected inverse on the pattern of L (Takahashi recursion). sigma shares
  // the layout of l_values_.
  const auto& lp = symbolic_->l_col_ptr_;
  std::vector<double> sigma(l_values_.size(), 0.0);
  auto lookup = [&](int r, int c) {
    if (r < c) std::swap(r, c);
    const auto begin = l_row_index_.begin() + lp[c];
    const auto end = l_row_index_.begin() + lp[c + 1];
    const auto it = std::lower_bound(begin, end, r);
    return sigma[static_cast<std::size_t>(it - l_row_index_.begin())];
  };
  for (int i = n - 1; i >= 0; --i) {
    const double lii = l_values_[lp[i]];
    for (int pj = lp[i + 1] - 1; pj > lp[i]; --pj) {
      const int j = l_row_index_[pj];
      double acc = 0.0;
      for (int pk = lp[i] + 1; pk < lp[i + 1]; ++pk) {
        acc += l_values_[pk] * lookup(l_row_index_[pk], j);
      }
      sigma[pj] = -acc / lii;
    }
    double acc = 0.0;
    for (int pk = lp[i] + 1; pk < lp[i + 1]; ++pk) acc += l_values_[pk] * sigma[pk];
    sigma[lp[i]] = 1.0 / (lii * lii) - acc / lii;
  }
  for (int k = 0; k < n; ++k) out[perm[k]] = sigma[lp[k]];
  return out;
}

Eigen::MatrixXd CholeskyFactor::lower_dense() const {
  const int n = dim();
  const auto& lp = symbolic_->l_col_ptr_;
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int p = lp[j]; p < lp[j + 1]; ++p) l(l_row_index_[p], j) = l_values_[p];
  }
  return l;
}

}  // namespace inlite
