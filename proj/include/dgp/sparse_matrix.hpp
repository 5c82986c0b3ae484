#pragma once

// Compressed-row sparse matrices and a small row-major dense matrix.
//
// CsrMatrix<T> keeps the canonical form required by the rest of the library:
// column indices strictly increasing within each row, no duplicate
// coordinates, no stored zeros. Every constructor path enforces it.
//
// Integer instantiations (path counts) use checked arithmetic and throw
// std::overflow_error instead of wrapping.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace dgp {

namespace detail {

template <typename T>
T checked_add(T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    T out;
    if (__builtin_add_overflow(a, b, &out)) {
      throw std::overflow_error("sparse matrix: integer overflow in addition");
    }
    return out;
  } else {
    return a + b;
  }
}

template <typename T>
T checked_mul(T a, T b) {
  if constexpr (std::is_integral_v<T>) {
    T out;
    if (__builtin_mul_overflow(a, b, &out)) {
      throw std::overflow_error(
          "sparse matrix: integer overflow in multiplication");
    }
    return out;
  } else {
    return a * b;
  }
}

}  // namespace detail

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

template <typename T>
class CsrMatrix {
 public:
  using value_type = T;

  struct Entry {
    std::size_t row;
    std::size_t col;
    T value;
  };

  CsrMatrix() : row_ptr_(1, 0) {}

  // An all-zero matrix of the given shape.
  CsrMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Builds a canonical matrix from unordered coordinates. Duplicate
  // coordinates are summed; entries that end up zero are dropped.
  static CsrMatrix from_entries(std::size_t rows, std::size_t cols,
                                std::vector<Entry> entries) {
    for (const auto& e : entries) {
      if (e.row >= rows || e.col >= cols) {
        throw std::out_of_range("sparse matrix: entry (" +
                                std::to_string(e.row) + ", " +
                                std::to_string(e.col) + ") outside " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    std::size_t i = 0;
    while (i < entries.size()) {
      std::size_t j = i;
      T sum = entries[i].value;
      while (++j < entries.size() && entries[j].row == entries[i].row &&
             entries[j].col == entries[i].col) {
        sum = detail::checked_add(sum, entries[j].value);
      }
      if (sum != T{}) {
        m.col_idx_.push_back(entries[i].col);
        m.values_.push_back(sum);
        ++m.row_ptr_[entries[i].row + 1];
      }
      i = j;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  static CsrMatrix identity(std::size_t n, T diagonal = T{1}) {
    CsrMatrix m(n, n);
    if (diagonal == T{}) return m;
    m.col_idx_.resize(n);
    m.values_.assign(n, diagonal);
    for (std::size_t i = 0; i < n; ++i) {
      m.col_idx_[i] = i;
      m.row_ptr_[i + 1] = i + 1;
    }
    return m;
  }

  // Adopts raw CSR arrays after checking the canonical-form invariants.
  static CsrMatrix from_csr(std::size_t rows, std::size_t cols,
                            std::vector<std::size_t> row_ptr,
                            std::vector<std::size_t> col_idx,
                            std::vector<T> values) {
    if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != col_idx.size() || col_idx.size() != values.size()) {
      throw std::invalid_argument("sparse matrix: inconsistent CSR arrays");
    }
    for (std::size_t r = 0; r < rows; ++r) {
      if (row_ptr[r] > row_ptr[r + 1]) {
        throw std::invalid_argument("sparse matrix: row_ptr not monotone");
      }
      for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        if (col_idx[k] >= cols) {
          throw std::out_of_range("sparse matrix: column index out of range");
        }
        if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
          throw std::invalid_argument(
              "sparse matrix: unsorted or duplicate column in row " +
              std::to_string(r));
        }
        if (values[k] == T{}) {
          throw std::invalid_argument("sparse matrix: stored explicit zero");
        }
      }
    }
    CsrMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    check_row(r);
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const T> row_values(std::size_t r) const {
    check_row(r);
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  T at(std::size_t r, std::size_t c) const {
    if (c >= cols_) throw std::out_of_range("sparse matrix: column out of range");
    const auto cols = row_cols(r);
    const auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return T{};
    return row_values(r)[static_cast<std::size_t>(it - cols.begin())];
  }

  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        out.push_back({r, col_idx_[k], values_[k]});
      }
    }
    return out;
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<T>& values() const { return values_; }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  void check_row(std::size_t r) const {
    if (r >= rows_) {
      throw std::out_of_range("sparse matrix: row " + std::to_string(r) +
                              " out of range (" + std::to_string(rows_) +
                              " rows)");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<T> values_;
};

// Binary adjacency and metapath path counts.
using CountMatrix = CsrMatrix<std::uint64_t>;
// Real-valued operators (transition, diffusion).
using SparseMatrix = CsrMatrix<double>;

// Gustavson row-by-row product with a dense accumulator.
template <typename T>
CsrMatrix<T> multiply(const CsrMatrix<T>& a, const CsrMatrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("sparse multiply: shape mismatch " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " * " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
  const std::size_t n = b.cols();
  std::vector<T> acc(n, T{});
  std::vector<bool> touched(n, false);
  std::vector<std::size_t> pattern;
  std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<T> values;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    pattern.clear();
    const auto a_cols = a.row_cols(i);
    const auto a_vals = a.row_values(i);
    for (std::size_t p = 0; p < a_cols.size(); ++p) {
      const auto b_cols = b.row_cols(a_cols[p]);
      const auto b_vals = b.row_values(a_cols[p]);
      for (std::size_t q = 0; q < b_cols.size(); ++q) {
        const std::size_t j = b_cols[q];
        if (!touched[j]) {
          touched[j] = true;
          pattern.push_back(j);
        }
        acc[j] = detail::checked_add(acc[j], detail::checked_mul(a_vals[p], b_vals[q]));
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (std::size_t j : pattern) {
      if (acc[j] != T{}) {
        col_idx.push_back(j);
        values.push_back(acc[j]);
      }
      acc[j] = T{};
      touched[j] = false;
    }
    row_ptr[i + 1] = col_idx.size();
  }
  return CsrMatrix<T>::from_csr(a.rows(), n, std::move(row_ptr),
                                std::move(col_idx), std::move(values));
}

template <typename T>
CsrMatrix<T> add(const CsrMatrix<T>& a, const CsrMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("sparse add: shape mismatch");
  }
  std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
  std::vector<std::size_t> col_idx;
  std::vector<T> values;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    const auto bc = b.row_cols(i);
    const auto bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      std::size_t col;
      T v;
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        col = ac[p];
        v = av[p++];
      } else if (p == ac.size() || bc[q] < ac[p]) {
        col = bc[q];
        v = bv[q++];
      } else {
        col = ac[p];
        v = detail::checked_add(av[p++], bv[q++]);
      }
      if (v != T{}) {
        col_idx.push_back(col);
        values.push_back(v);
      }
    }
    row_ptr[i + 1] = col_idx.size();
  }
  return CsrMatrix<T>::from_csr(a.rows(), a.cols(), std::move(row_ptr),
                                std::move(col_idx), std::move(values));
}

inline SparseMatrix scale(const SparseMatrix& a, double factor) {
  std::vector<SparseMatrix::Entry> entries;
  entries.reserve(a.nnz());
  for (auto e : a.entries()) {
    e.value *= factor;
    entries.push_back(e);
  }
  return SparseMatrix::from_entries(a.rows(), a.cols(), std::move(entries));
}

template <typename T>
SparseMatrix to_real(const CsrMatrix<T>& a) {
  std::vector<double> values(a.values().begin(), a.values().end());
  return SparseMatrix::from_csr(a.rows(), a.cols(), a.row_ptr(), a.col_idx(),
                                std::move(values));
}

// Sparse times dense: (rows(a) x cols(x)).
DenseMatrix multiply(const SparseMatrix& a, const DenseMatrix& x);

DenseMatrix to_dense(const SparseMatrix& a);

}  // namespace dgp
