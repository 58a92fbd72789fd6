#pragma once

#include <lapacke.h>

#include <Eigen/Core>
#include <stdexcept>
#include <vector>

namespace lgq::detail {

// k-th smallest eigenvalue (0-based) of a symmetric matrix; destroys its copy.
inline double eigenvalue_at_index(Eigen::MatrixXd a, int idx) {
  lapack_int n = (lapack_int)a.rows();
  if (idx < 0 || idx >= n) throw std::invalid_argument("eigenvalue index out of range");
  std::vector<double> w((std::size_t)n, 0.0);
  std::vector<lapack_int> isuppz(2);
  double zdummy = 0.0;
  lapack_int m = 0;
  lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, a.data(), n, 0.0,
                                   0.0, (lapack_int)idx + 1, (lapack_int)idx + 1, 0.0, &m,
                                   w.data(), &zdummy, 1, isuppz.data());
  if (info != 0) throw std::runtime_error("partial eigenvalue computation failed");
  return w[0];
}

}  // namespace lgq::detail
