#include "lgq/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "eig_util.hpp"
#include "lgq/specfun.hpp"
#include "lgq/threads.hpp"

namespace lgq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Factored {
  Eigen::MatrixXd a;             // dsytrf output, lower storage
  std::vector<lapack_int> ipiv;  // Bunch-Kaufman pivoting
};

Factored bunch_kaufman(const Eigen::MatrixXd& m) {
  Factored f;
  f.a = m;
  lapack_int n = (lapack_int)m.rows();
  f.ipiv.assign((std::size_t)std::max<lapack_int>(n, 1), 0);
  if (n == 0) return f;
  lapack_int info =
      LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, f.a.data(), n, f.ipiv.data());
  if (info < 0) throw std::runtime_error("symmetric factorization: bad argument");
  // info > 0 flags an exactly singular diagonal block; the factorization is
  // still complete and the block walk below classifies it as a zero pivot.
  return f;
}

// Eigenvalues of the 1x1 / 2x2 diagonal blocks of the factored matrix.
template <typename OnValue>
void walk_blocks(const Factored& f, OnValue&& on_value) {
  lapack_int n = (lapack_int)f.a.rows();
  lapack_int k = 0;
  while (k < n) {
    if (f.ipiv[(std::size_t)k] > 0) {
      on_value(f.a((Eigen::Index)k, (Eigen::Index)k));
      ++k;
    } else {
      double a = f.a((Eigen::Index)k, (Eigen::Index)k);
      double c = f.a((Eigen::Index)k + 1, (Eigen::Index)k + 1);
      double b = f.a((Eigen::Index)k + 1, (Eigen::Index)k);
      double tr = a + c;
      double det = a * c - b * b;
      double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
      on_value(0.5 * (tr + disc));
      on_value(0.5 * (tr - disc));
      k += 2;
    }
  }
}

using detail::eigenvalue_at_index;

struct RawRoot {
  double kappa = 0.0;
  int index = 0;  // 0-based sorted-eigenvalue index that crosses zero here
  double residual = 0.0;
  bool warning = false;
};

}  // namespace

LambdaSystem::LambdaSystem(DiscretizedGraph g) : graph(std::move(g)) {
  Eigen::Index n = graph.points.rows();
  if (n < 1) throw std::invalid_argument("interaction set must be non-empty");
  distances.resize(n, n);
  double min_off = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    distances(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double r = (graph.points.row(i) - graph.points.row(j)).norm();
      distances(i, j) = r;
      distances(j, i) = r;
      min_off = std::min(min_off, r);
    }
  }
  if (n > 1 && !(min_off > 0.0))
    throw std::invalid_argument("coincident interaction sites are not allowed");
}

Eigen::MatrixXd assemble_lambda(const LambdaSystem& sys, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::domain_error("kappa must be positive and finite");
  Eigen::Index n = sys.size();
  double diag = (kTwoPi * (double)n * sys.graph.alpha + std::log(kappa / 2.0) +
                 euler_gamma) /
                kTwoPi;
  Eigen::MatrixXd m(n, n);
  parallel_for((std::size_t)n, [&](std::size_t jj) {
    Eigen::Index j = (Eigen::Index)jj;
    m(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i)
      m(i, j) = -bessel_k0(kappa * sys.distances(i, j)) / kTwoPi;
  });
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) m(j, i) = m(i, j);
  return m;
}

Inertia inertia(const Eigen::MatrixXd& m, double zero_tol_rel) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inertia: matrix must be square");
  Inertia out;
  if (m.rows() == 0) return out;
  double scale = m.cwiseAbs().maxCoeff();
  double zero_tol = zero_tol_rel * scale;
  Factored f = bunch_kaufman(m);
  walk_blocks(f, [&](double v) {
    if (std::abs(v) <= zero_tol)
      ++out.n_zero;
    else if (v < 0.0)
      ++out.n_neg;
    else
      ++out.n_pos;
  });
  return out;
}

SLogDet slogdet(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("slogdet: matrix must be square");
  SLogDet out;
  out.sign = 1;
  out.log_abs = 0.0;
  if (m.rows() == 0) return out;
  Factored f = bunch_kaufman(m);
  walk_blocks(f, [&](double v) {
    if (v == 0.0) {
      out.sign = 0;
      out.log_abs = -std::numeric_limits<double>::infinity();
    } else if (out.sign != 0) {
      if (v < 0.0) out.sign = -out.sign;
      out.log_abs += std::log(std::abs(v));
    }
  });
  return out;
}

double default_kappa_min(const LambdaSystem& sys) { return 1e-3 * sys.graph.gamma; }

double default_kappa_max(const LambdaSystem& sys) {
  double kappa_single = 2.0 * std::exp(-euler_gamma - kTwoPi * sys.graph.alpha);
  return 1.25 * std::max(sys.graph.gamma, kappa_single);
}

Spectrum find_eigenvalues(const LambdaSystem& sys, double kappa_min, double kappa_max,
                          int scan_points, double tol, double degeneracy_rel_tol,
                          int refine_cap) {
  if (!(kappa_min > 0.0) || !(kappa_max > kappa_min))
    throw std::invalid_argument("kappa window must satisfy 0 < kappa_min < kappa_max");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (scan_points < 2) scan_points = 2;

  auto n_neg_at = [&](double k) { return inertia(assemble_lambda(sys, k)).n_neg; };

  // Geometric scan grid with the negative-eigenvalue count at each node.
  std::vector<double> nodes((std::size_t)scan_points);
  std::vector<int> negs((std::size_t)scan_points);
  double ratio = kappa_max / kappa_min;
  for (int i = 0; i < scan_points; ++i)
    nodes[(std::size_t)i] =
        kappa_min * std::pow(ratio, (double)i / (double)(scan_points - 1));
  nodes.back() = kappa_max;
  for (int i = 0; i < scan_points; ++i) negs[(std::size_t)i] = n_neg_at(nodes[(std::size_t)i]);

  struct Interval {
    double a, b;
    int na, nb;
    bool warn;
  };
  std::vector<Interval> work, resolved;
  for (int i = 0; i + 1 < scan_points; ++i)
    if (negs[(std::size_t)i] != negs[(std::size_t)i + 1])
      work.push_back({nodes[(std::size_t)i], nodes[(std::size_t)i + 1],
                      negs[(std::size_t)i], negs[(std::size_t)i + 1], false});

  // Split intervals where the count jumps by more than one, so that distinct
  // branches get distinct brackets; a jump that cannot be separated within the
  // refinement budget is still bisected per index but flagged.
  int budget = std::max(refine_cap, 0);
  while (!work.empty()) {
    Interval iv = work.back();
    work.pop_back();
    int jump = std::abs(iv.na - iv.nb);
    if (jump == 1) {
      resolved.push_back(iv);
      continue;
    }
    if (budget <= 0 || (iv.b - iv.a) <= 1e-9 * iv.b) {
      iv.warn = true;
      resolved.push_back(iv);
      continue;
    }
    double mid = std::sqrt(iv.a * iv.b);
    int nm = n_neg_at(mid);
    --budget;
    if (nm != iv.na) work.push_back({iv.a, mid, iv.na, nm, iv.warn});
    if (nm != iv.nb) work.push_back({mid, iv.b, nm, iv.nb, iv.warn});
  }

  std::vector<RawRoot> roots;
  for (const Interval& iv : resolved) {
    int lo = std::min(iv.na, iv.nb), hi = std::max(iv.na, iv.nb);
    for (int m = lo + 1; m <= hi; ++m) {
      // kappa* for sorted-eigenvalue index m-1: the predicate n_neg >= m flips
      // exactly where that eigenvalue crosses zero.
      double a = iv.a, b = iv.b;
      bool pa = iv.na >= m;
      for (int iter = 0; iter < 64 && (b - a) > 1e-13 * b; ++iter) {
        double mid = 0.5 * (a + b);
        if ((n_neg_at(mid) >= m) == pa)
          a = mid;
        else
          b = mid;
      }
      RawRoot r;
      r.kappa = 0.5 * (a + b);
      r.index = m - 1;
      r.residual = std::abs(eigenvalue_at_index(assemble_lambda(sys, r.kappa), m - 1));
      r.warning = iv.warn || r.residual >= tol;
      // Cross-check: the matrix must be (numerically) singular at the root.
      if (inertia(assemble_lambda(sys, r.kappa), 1e-8).n_zero < 1) r.warning = true;
      roots.push_back(r);
    }
  }

  std::sort(roots.begin(), roots.end(),
            [](const RawRoot& x, const RawRoot& y) { return x.kappa > y.kappa; });

  Spectrum sp;
  double max_abs_e = 0.0;
  for (const RawRoot& r : roots) max_abs_e = std::max(max_abs_e, r.kappa * r.kappa);
  sp.degeneracy_tol = degeneracy_rel_tol * max_abs_e;

  double thresh = -0.25 * sys.graph.gamma * sys.graph.gamma;
  std::size_t i = 0;
  while (i < roots.size()) {
    std::size_t j = i + 1;
    double e_prev = -roots[i].kappa * roots[i].kappa;
    while (j < roots.size()) {
      double e_next = -roots[j].kappa * roots[j].kappa;
      if (std::abs(e_next - e_prev) >
          degeneracy_rel_tol * std::max(std::abs(e_next), std::abs(e_prev)))
        break;
      e_prev = e_next;
      ++j;
    }
    SpectrumLevel lvl;
    double esum = 0.0, ksum = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      esum += -roots[k].kappa * roots[k].kappa;
      ksum += roots[k].kappa;
      lvl.lambda_residual = std::max(lvl.lambda_residual, roots[k].residual);
      lvl.branch_warning = lvl.branch_warning || roots[k].warning;
    }
    lvl.multiplicity = (int)(j - i);
    lvl.energy = esum / (double)lvl.multiplicity;
    lvl.kappa = ksum / (double)lvl.multiplicity;
    lvl.above_threshold = sys.graph.has_cutoff_edges && lvl.energy > thresh;
    sp.levels.push_back(lvl);
    i = j;
  }
  return sp;
}

Eigen::MatrixXd null_vector(const LambdaSystem& sys, double E0, double tol) {
  if (!(E0 < 0.0)) throw std::domain_error("E0 must be negative");
  double kappa0 = std::sqrt(-E0);
  Eigen::MatrixXd a = assemble_lambda(sys, kappa0);
  lapack_int n = (lapack_int)a.rows();
  std::vector<double> w((std::size_t)n, 0.0);
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw std::runtime_error("eigendecomposition failed");
  std::vector<Eigen::Index> cols;
  for (lapack_int k = 0; k < n; ++k)
    if (std::abs(w[(std::size_t)k]) < 10.0 * tol) cols.push_back((Eigen::Index)k);
  if (cols.empty())
    throw std::runtime_error("no null direction at the requested energy (stale root?)");
  Eigen::MatrixXd out((Eigen::Index)n, (Eigen::Index)cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) out.col((Eigen::Index)k) = a.col(cols[k]);
  return out;
}

EigenfunctionGrid eval_eigenfunction(const LambdaSystem& sys, const Eigen::VectorXd& c,
                                     double kappa0, const Rect& window, int nx, int ny) {
  if (c.size() != (Eigen::Index)sys.size())
    throw std::invalid_argument("coefficient vector size must match the interaction set");
  if (!(kappa0 > 0.0)) throw std::domain_error("kappa0 must be positive");
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid must have at least one node");
  if (!(window.xmax >= window.xmin) || !(window.ymax >= window.ymin))
    throw std::invalid_argument("window must be a valid rectangle");

  EigenfunctionGrid g;
  g.kappa0 = kappa0;
  g.coefficients = c;
  g.xs.resize((std::size_t)nx);
  g.ys.resize((std::size_t)ny);
  for (int i = 0; i < nx; ++i)
    g.xs[(std::size_t)i] =
        nx == 1 ? window.xmin
                : window.xmin + (window.xmax - window.xmin) * (double)i / (double)(nx - 1);
  for (int j = 0; j < ny; ++j)
    g.ys[(std::size_t)j] =
        ny == 1 ? window.ymin
                : window.ymin + (window.ymax - window.ymin) * (double)j / (double)(ny - 1);
  g.values.resize(ny, nx);
  g.near_site.resize(ny, nx);

  double near_r = sys.graph.spacing / 10.0;
  Eigen::Index n = sys.size();
  parallel_for((std::size_t)ny, [&](std::size_t jj) {
    double y = g.ys[jj];
    for (int i = 0; i < nx; ++i) {
      double x = g.xs[(std::size_t)i];
      double acc = 0.0;
      unsigned char near = 0;
      for (Eigen::Index s = 0; s < n; ++s) {
        double dx = x - sys.graph.points(s, 0);
        double dy = y - sys.graph.points(s, 1);
        double r = std::sqrt(dx * dx + dy * dy);
        if (r < near_r) near = 1;
        acc += c(s) * bessel_k0(kappa0 * std::max(r, 1e-300));
      }
      g.values((Eigen::Index)jj, (Eigen::Index)i) = acc / kTwoPi;
      g.near_site((Eigen::Index)jj, (Eigen::Index)i) = near;
    }
  });
  return g;
}

double schur_margin(const LambdaSystem& sys, double kappa) {
  if (!(kappa > 0.0)) throw std::domain_error("kappa must be positive");
  Eigen::Index n = sys.size();
  std::vector<double> row_means((std::size_t)n, 0.0);
  parallel_for((std::size_t)n, [&](std::size_t ii) {
    Eigen::Index i = (Eigen::Index)ii;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) acc += bessel_k0(kappa * sys.distances(i, j)) / kTwoPi;
    row_means[ii] = acc / (double)n;
  });
  double worst = 0.0;
  for (double v : row_means) worst = std::max(worst, v);
  return sys.graph.alpha - worst;
}

ScaleCheckReport scaled_spectrum_check(const LambdaSystem& sys, double s, double kappa_min,
                                       double kappa_max, int scan_points, double tol) {
  if (!(s > 0.0)) throw std::domain_error("scale factor must be positive");
  DiscretizedGraph g2 = sys.graph;
  g2.points *= s;
  g2.total_length *= s;
  g2.spacing *= s;
  g2.gamma /= s;
  g2.alpha = sys.graph.alpha + std::log(s) / (kTwoPi * (double)sys.size());
  LambdaSystem sys2(std::move(g2));

  Spectrum s1 = find_eigenvalues(sys, kappa_min, kappa_max, scan_points, tol);
  Spectrum s2 = find_eigenvalues(sys2, kappa_min / s, kappa_max / s, scan_points, tol);

  ScaleCheckReport rep;
  if (s1.levels.size() != s2.levels.size()) {
    rep.max_rel_mismatch = std::numeric_limits<double>::infinity();
    rep.levels_compared = (int)std::min(s1.levels.size(), s2.levels.size());
    return rep;
  }
  rep.levels_compared = (int)s1.levels.size();
  for (std::size_t i = 0; i < s1.levels.size(); ++i) {
    double expect = s1.levels[i].energy / (s * s);
    double got = s2.levels[i].energy;
    rep.max_rel_mismatch =
        std::max(rep.max_rel_mismatch, std::abs(got - expect) / std::abs(expect));
  }
  return rep;
}

}  // namespace lgq
