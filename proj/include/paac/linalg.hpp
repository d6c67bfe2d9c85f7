#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "paac/common.hpp"

namespace paac {

// Row-major dense matrix. Small and value-semantic; this project never
// needs more than a few hundred rows.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  DenseMatrix(std::size_t r, std::size_t c, Vec values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw ShapeError("DenseMatrix: data length " + std::to_string(data.size()) +
                       " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::size_t size() const { return data.size(); }
};

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                               const char* what) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                     std::to_string(b.rows) + "x" + std::to_string(b.cols));
  }
}

// y = M x
inline void matvec_into(const DenseMatrix& m, const Vec& x, Vec& y) {
  if (x.size() != m.cols) {
    throw ShapeError("matvec: input length " + std::to_string(x.size()) +
                     " != cols " + std::to_string(m.cols));
  }
  y.assign(m.rows, 0.0);
  const double* row = m.data.data();
  for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

inline Vec matvec(const DenseMatrix& m, const Vec& x) {
  Vec y;
  matvec_into(m, x, y);
  return y;
}

// y = Mᵀ x  (accumulating variant used by backprop)
inline void matvec_transpose_accum(const DenseMatrix& m, const Vec& x, Vec& y) {
  if (x.size() != m.rows) {
    throw ShapeError("matvec_transpose: input length " + std::to_string(x.size()) +
                     " != rows " + std::to_string(m.rows));
  }
  if (y.size() != m.cols) y.assign(m.cols, 0.0);
  const double* row = m.data.data();
  for (std::size_t i = 0; i < m.rows; ++i, row += m.cols) {
    const double xi = x[i];
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
}

inline Vec matvec_transpose(const DenseMatrix& m, const Vec& x) {
  Vec y(m.cols, 0.0);
  matvec_transpose_accum(m, x, y);
  return y;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols) +
                     " != " + std::to_string(b.rows));
  }
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

inline DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += b.data[i];
  return c;
}

inline DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "sub");
  DenseMatrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

inline DenseMatrix scale(const DenseMatrix& a, double s) {
  DenseMatrix c = a;
  for (double& v : c.data) v *= s;
  return c;
}

inline double inf_norm(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.data) m = std::max(m, std::abs(v));
  return m;
}

// Solves A X = B by Gaussian elimination with partial pivoting. A is square
// and small (action dimension in this project), so no blocking is needed.
inline DenseMatrix solve(DenseMatrix a, DenseMatrix b) {
  if (a.rows != a.cols) throw ShapeError("solve: A must be square");
  if (a.rows != b.rows) throw ShapeError("solve: A rows != B rows");
  const std::size_t n = a.rows;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
    }
    if (std::abs(a.at(pivot, col)) < 1e-300) {
      throw NumericError("solve: singular matrix");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
      for (std::size_t j = 0; j < b.cols; ++j) std::swap(b.at(col, j), b.at(pivot, j));
    }
    const double inv = 1.0 / a.at(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a.at(r, col) * inv;
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a.at(r, j) -= factor * a.at(col, j);
      for (std::size_t j = 0; j < b.cols; ++j) b.at(r, j) -= factor * b.at(col, j);
    }
  }
  DenseMatrix x(n, b.cols);
  for (std::size_t r = n; r-- > 0;) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      double acc = b.at(r, j);
      for (std::size_t k = r + 1; k < n; ++k) acc -= a.at(r, k) * x.at(k, j);
      x.at(r, j) = acc / a.at(r, r);
    }
  }
  return x;
}

// xᵀ M y for the quadratic forms in the LQR oracle.
inline double quadratic_form(const Vec& x, const DenseMatrix& m, const Vec& y) {
  if (x.size() != m.rows || y.size() != m.cols) {
    throw ShapeError("quadratic_form: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) row += m.at(i, j) * y[j];
    acc += x[i] * row;
  }
  return acc;
}

// Spectral radius for the closed-loop stability checks; exact for n <= 2,
// power iteration on AᵀA otherwise (singular values bound is not what we
// want, so general n falls back to many-step power iteration on A with
// normalization, adequate for the small systems used here).
inline double spectral_radius(const DenseMatrix& a) {
  if (a.rows != a.cols) throw ShapeError("spectral_radius: square matrix required");
  if (a.rows == 1) return std::abs(a.at(0, 0));
  if (a.rows == 2) {
    const double tr = a.at(0, 0) + a.at(1, 1);
    const double det = a.at(0, 0) * a.at(1, 1) - a.at(0, 1) * a.at(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      return std::max(std::abs((tr + s) / 2.0), std::abs((tr - s) / 2.0));
    }
    return std::sqrt(det);  // complex pair, |λ| = sqrt(det)
  }
  Vec v(a.rows, 1.0);
  double lambda = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    Vec w = matvec(a, v);
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    for (double& x : w) x /= norm;
    lambda = norm;
    v = std::move(w);
  }
  return lambda;
}

}  // namespace paac
