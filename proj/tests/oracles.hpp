// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written with plain loops and containers,
// not with the linear-algebra routines under test.
#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat make_mat(std::size_t rows, std::size_t cols) {
  return Mat(rows, std::vector<double>(cols, 0.0));
}

// Cyclic Jacobi eigensolver for symmetric matrices. Returns eigenvalues in
// descending order; optionally accumulates eigenvectors as columns of v.
inline std::vector<double> symmetric_eigen(Mat a, Mat* v_out = nullptr) {
  const std::size_t n = a.size();
  Mat v = make_mat(n, n);
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      diag += a[p][p] * a[p][p];
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off <= 1e-30 * (diag + off + 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i][p];
          const double aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p][i];
          const double aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
          const double vip = v[i][p];
          const double viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  std::vector<double> eig(n);
  Mat sorted_v = make_mat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    eig[j] = a[order[j]][order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted_v[i][j] = v[i][order[j]];
  }
  if (v_out) *v_out = std::move(sorted_v);
  return eig;
}

// Singular values of an arbitrary rows x cols matrix via the eigenvalues of
// the smaller Gram matrix.
inline std::vector<double> singular_values(const Mat& m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  const bool use_left = rows <= cols;
  const std::size_t n = use_left ? rows : cols;
  Mat gram = make_mat(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      if (use_left) {
        for (std::size_t t = 0; t < cols; ++t) s += m[i][t] * m[j][t];
      } else {
        for (std::size_t t = 0; t < rows; ++t) s += m[t][i] * m[t][j];
      }
      gram[i][j] = s;
    }
  }
  std::vector<double> eig = symmetric_eigen(gram);
  for (double& e : eig) e = std::sqrt(std::max(e, 0.0));
  return eig;
}

// Left singular vectors (columns, descending singular value) from the
// eigendecomposition of M Mᵀ.
inline Mat left_singular_vectors(const Mat& m) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  Mat gram = make_mat(rows, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < cols; ++t) s += m[i][t] * m[j][t];
      gram[i][j] = s;
    }
  }
  Mat u;
  symmetric_eigen(std::move(gram), &u);
  return u;
}

// Best rank-k approximation assembled as U_k U_kᵀ M.
inline Mat rank_k_approximation(const Mat& m, std::size_t k) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  const Mat u = left_singular_vectors(m);
  Mat proj = make_mat(rows, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += u[i][c] * u[j][c];
      proj[i][j] = s;
    }
  }
  Mat out = make_mat(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < rows; ++t) s += proj[i][t] * m[t][j];
      out[i][j] = s;
    }
  }
  return out;
}

// Tail-energy curve and minimal k from a plain singular-value list.
inline std::pair<std::vector<double>, int> effective_rank(const std::vector<double>& sigma,
                                                          double epsilon) {
  const std::size_t r = sigma.size();
  double total = 0.0;
  for (double s : sigma) total += s * s;
  std::vector<double> err(r);
  double tail = 0.0;
  err[r - 1] = 0.0;
  for (std::size_t k = r - 1; k >= 1; --k) {
    tail += sigma[k] * sigma[k];
    err[k - 1] = tail / total;
  }
  int chosen = static_cast<int>(r);
  for (std::size_t k = 1; k <= r; ++k) {
    if (err[k - 1] <= epsilon) {
      chosen = static_cast<int>(k);
      break;
    }
  }
  return {err, chosen};
}

// Mann-Whitney pair statistic: (wins + half the ties) / (n_pos * n_neg).
inline double pair_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double ties = 0.0;
  long n_pos = 0;
  long n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] > 0) {
      ++n_pos;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (labels[j] > 0) continue;
        if (scores[i] > scores[j]) wins += 1.0;
        if (scores[i] == scores[j]) ties += 1.0;
      }
    } else {
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) throw std::runtime_error("pair_auc needs both classes");
  return (wins + 0.5 * ties) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Central finite difference of f along coordinate-free perturbation.
inline double central_difference(const std::function<double(double)>& f, double h = 1e-6) {
  return (f(h) - f(-h)) / (2.0 * h);
}

// Five-point stencil: O(h^4) truncation lets h be large enough to keep the
// cancellation noise well below the comparison tolerances.
inline double central_difference5(const std::function<double(double)>& f, double h = 1e-4) {
  return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
}

// Root of a decreasing-or-increasing continuous function by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::runtime_error("bisect: no sign change");
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Coarse-to-fine grid minimization of a 2-D function.
inline std::pair<double, double> grid_minimize(const std::function<double(double, double)>& f,
                                               double lo, double hi, int rounds = 8,
                                               int points = 41) {
  double x_lo = lo, x_hi = hi, y_lo = lo, y_hi = hi;
  double best_x = 0.0, best_y = 0.0;
  for (int r = 0; r < rounds; ++r) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
      const double x = x_lo + (x_hi - x_lo) * i / (points - 1);
      for (int j = 0; j < points; ++j) {
        const double y = y_lo + (y_hi - y_lo) * j / (points - 1);
        const double v = f(x, y);
        if (v < best) {
          best = v;
          best_x = x;
          best_y = y;
        }
      }
    }
    const double x_step = (x_hi - x_lo) / (points - 1);
    const double y_step = (y_hi - y_lo) / (points - 1);
    x_lo = best_x - 2.0 * x_step;
    x_hi = best_x + 2.0 * x_step;
    y_lo = best_y - 2.0 * y_step;
    y_hi = best_y + 2.0 * y_step;
  }
  return {best_x, best_y};
}

// --- helpers for exercising the installed CLI binary ---

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

inline std::string cli_path() {
  const char* p = std::getenv("SENTIVEC_CLI");
  return p ? std::string(p) : std::string();
}

inline CliResult run_cli(const std::string& args) {
  const std::string bin = cli_path();
  if (bin.empty()) throw std::runtime_error("SENTIVEC_CLI is not set");
  const std::string cmd = bin + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
  CliResult result;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
    result.output.append(buf, got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Fresh scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("sentivec_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
