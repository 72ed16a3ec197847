#pragma once

// Small dense linear algebra for chart computations. Dimensions are 2 or 4
// at runtime, so everything is fixed-capacity and lives on the stack.

#include <array>
#include <cmath>
#include <cstring>

#include "dbar/errors.hpp"

namespace dbar {

inline constexpr int kMaxDim = 4;

struct Vec {
  std::array<double, kMaxDim> v{};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) v[i++] = x;
  }

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < n; ++i) s += v[i] * o.v[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
  return r;
}
inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
  return r;
}
inline Vec operator*(double c, const Vec& a) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = c * a[i];
  return r;
}

// Row-major matrix; m[i][j] with i the first index, e.g. J^i_j or g_{ij}.
struct Mat {
  std::array<std::array<double, kMaxDim>, kMaxDim> m{};
  int rows = 0, cols = 0;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c) {}
  static Mat identity(int d) {
    Mat I(d, d);
    for (int i = 0; i < d; ++i) I.m[i][i] = 1.0;
    return I;
  }
  static Mat zero(int r, int c) { return Mat(r, c); }

  std::array<double, kMaxDim>& operator[](int i) { return m[i]; }
  const std::array<double, kMaxDim>& operator[](int i) const { return m[i]; }

  Vec col(int j) const {
    Vec r(rows);
    for (int i = 0; i < rows; ++i) r[i] = m[i][j];
    return r;
  }
};

inline Mat operator+(const Mat& a, const Mat& b) {
  Mat r(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r[i][j] = a[i][j] + b[i][j];
  return r;
}
inline Mat operator-(const Mat& a, const Mat& b) {
  Mat r(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r[i][j] = a[i][j] - b[i][j];
  return r;
}
inline Mat operator*(double c, const Mat& a) {
  Mat r(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r[i][j] = c * a[i][j];
  return r;
}
inline Mat matmul(const Mat& a, const Mat& b) {
  Mat r(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a[i][k];
      for (int j = 0; j < b.cols; ++j) r[i][j] += aik * b[k][j];
    }
  return r;
}
inline Vec matvec(const Mat& a, const Vec& x) {
  Vec r(a.rows);
  for (int i = 0; i < a.rows; ++i) {
    double s = 0;
    for (int j = 0; j < a.cols; ++j) s += a[i][j] * x[j];
    r[i] = s;
  }
  return r;
}
inline Mat transpose(const Mat& a) {
  Mat r(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) r[j][i] = a[i][j];
  return r;
}

inline double det(const Mat& a) {
  const int n = a.rows;
  if (n == 1) return a[0][0];
  if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (n == 3)
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  // n == 4: Laplace expansion along the first row.
  double s = 0;
  for (int j = 0; j < 4; ++j) {
    Mat minor(3, 3);
    for (int r = 1; r < 4; ++r) {
      int cc = 0;
      for (int c = 0; c < 4; ++c) {
        if (c == j) continue;
        minor[r - 1][cc++] = a[r][c];
      }
    }
    s += ((j % 2) ? -1.0 : 1.0) * a[0][j] * det(minor);
  }
  return s;
}

// Gauss-Jordan with partial pivoting. Throws on (near-)singular input.
inline Mat inverse(const Mat& a) {
  const int n = a.rows;
  Mat w = a, inv = Mat::identity(n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(w[r][c]) > std::fabs(w[p][c])) p = r;
    if (!(std::fabs(w[p][c]) > 1e-300))
      throw degenerate_metric_error("singular matrix in inverse()");
    if (p != c) {
      std::swap(w.m[p], w.m[c]);
      std::swap(inv.m[p], inv.m[c]);
    }
    const double piv = 1.0 / w[c][c];
    for (int j = 0; j < n; ++j) {
      w[c][j] *= piv;
      inv[c][j] *= piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = w[r][c];
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        w[r][j] -= f * w[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Three- and four-index arrays, e.g. Γ^i_{jk} stored as t[i][j][k].
struct Ten3 {
  std::array<std::array<std::array<double, kMaxDim>, kMaxDim>, kMaxDim> t{};
  int n = 0;
  Ten3() = default;
  explicit Ten3(int dim) : n(dim) {}
  double& operator()(int i, int j, int k) { return t[i][j][k]; }
  double operator()(int i, int j, int k) const { return t[i][j][k]; }
};

struct Ten4 {
  std::array<std::array<std::array<std::array<double, kMaxDim>, kMaxDim>, kMaxDim>, kMaxDim> t{};
  int n = 0;
  Ten4() = default;
  explicit Ten4(int dim) : n(dim) {}
  double& operator()(int i, int j, int k, int l) { return t[i][j][k][l]; }
  double operator()(int i, int j, int k, int l) const { return t[i][j][k][l]; }
};

inline double max_abs(const Mat& a) {
  double m = 0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) m = std::max(m, std::fabs(a[i][j]));
  return m;
}
inline double max_abs(const Ten3& a) {
  double m = 0;
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j)
      for (int k = 0; k < a.n; ++k) m = std::max(m, std::fabs(a(i, j, k)));
  return m;
}

// Smallest eigenvalue of a symmetric 2x2 or 4x4 matrix via characteristic
// polynomial (2x2) or cyclic Jacobi sweeps (4x4). Used by validity checks.
inline double min_eigenvalue_sym(const Mat& a) {
  const int n = a.rows;
  if (n == 2) {
    const double tr = a[0][0] + a[1][1];
    const double d = det(a);
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - d));
    return tr / 2.0 - disc;
  }
  Mat w = a;
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += w[p][q] * w[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(w[p][q]) < 1e-300) continue;
        const double theta = (w[q][q] - w[p][p]) / (2.0 * w[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double wkp = w[k][p], wkq = w[k][q];
          w[k][p] = c * wkp - s * wkq;
          w[k][q] = s * wkp + c * wkq;
        }
        for (int k = 0; k < n; ++k) {
          const double wpk = w[p][k], wqk = w[q][k];
          w[p][k] = c * wpk - s * wqk;
          w[q][k] = s * wpk + c * wqk;
        }
      }
  }
  double mn = w[0][0];
  for (int i = 1; i < n; ++i) mn = std::min(mn, w[i][i]);
  return mn;
}

}  // namespace dbar
