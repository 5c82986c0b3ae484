#include "dgp/sparse_matrix.hpp"

namespace dgp {

DenseMatrix multiply(const SparseMatrix& a, const DenseMatrix& x) {
  if (a.cols() != x.rows()) {
    throw std::invalid_argument("sparse-dense multiply: shape mismatch " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " * " +
                                std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()));
  }
  DenseMatrix out(a.rows(), x.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const auto src = x.row(cols[p]);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += vals[p] * src[c];
    }
  }
  return out;
}

DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix out(a.rows(), a.cols());
  for (const auto& e : a.entries()) out(e.row, e.col) = e.value;
  return out;
}

}  // namespace dgp
