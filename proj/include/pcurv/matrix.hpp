#ifndef PCURV_MATRIX_HPP
#define PCURV_MATRIX_HPP

#include <stdexcept>
#include <vector>

namespace pcurv {

// Small dense matrix over an arbitrary commutative ring.
template <class T>
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<T> d;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c) {}
    Matrix(int r, int c, const T& fill) : rows(r), cols(c), d(static_cast<size_t>(r) * c, fill) {}

    T& at(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }

    bool square() const { return rows == cols; }
};

template <class T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("matrix shape mismatch");
    Matrix<T> r = a;
    for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = r.d[i] + b.d[i];
    return r;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("matrix shape mismatch");
    Matrix<T> r = a;
    for (size_t i = 0; i < r.d.size(); ++i) r.d[i] = r.d[i] - b.d[i];
    return r;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a) {
    Matrix<T> r = a;
    for (auto& x : r.d) x = -x;
    return r;
}

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matrix shape mismatch");
    Matrix<T> r(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
            T acc = a.at(i, 0) * b.at(0, j);
            for (int k = 1; k < a.cols; ++k) acc = acc + a.at(i, k) * b.at(k, j);
            r.at(i, j) = std::move(acc);
        }
    return r;
}

template <class T>
std::vector<T> operator*(const Matrix<T>& a, const std::vector<T>& v) {
    if (a.cols != static_cast<int>(v.size())) throw std::invalid_argument("matrix shape mismatch");
    std::vector<T> r;
    r.reserve(a.rows);
    for (int i = 0; i < a.rows; ++i) {
        T acc = a.at(i, 0) * v[0];
        for (int k = 1; k < a.cols; ++k) acc = acc + a.at(i, k) * v[k];
        r.push_back(std::move(acc));
    }
    return r;
}

template <class T>
bool operator==(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows != b.rows || a.cols != b.cols) return false;
    for (size_t i = 0; i < a.d.size(); ++i)
        if (!(a.d[i] == b.d[i])) return false;
    return true;
}

template <class T, class F>
Matrix<T> mat_map(const Matrix<T>& a, F&& f) {
    Matrix<T> r = a;
    for (auto& x : r.d) x = f(x);
    return r;
}

// Determinant by Laplace expansion; the ranks here never exceed a handful.
template <class T>
T mat_det(const Matrix<T>& m) {
    if (!m.square() || m.rows == 0) throw std::invalid_argument("determinant of non-square matrix");
    if (m.rows == 1) return m.at(0, 0);
    if (m.rows == 2) return m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0);
    Matrix<T> minor(m.rows - 1, m.cols - 1);
    bool first = true;
    T acc = m.at(0, 0);
    for (int j = 0; j < m.cols; ++j) {
        for (int r = 1; r < m.rows; ++r) {
            int cc = 0;
            for (int c = 0; c < m.cols; ++c) {
                if (c == j) continue;
                minor.at(r - 1, cc++) = m.at(r, c);
            }
        }
        T term = m.at(0, j) * mat_det(minor);
        if (j % 2 == 1) term = -term;
        if (first) {
            acc = std::move(term);
            first = false;
        } else {
            acc = acc + term;
        }
    }
    return acc;
}

// Adjugate (transpose of cofactors): m * adj(m) = det(m) * I.
template <class T>
Matrix<T> mat_adjugate(const Matrix<T>& m) {
    if (!m.square()) throw std::invalid_argument("adjugate of non-square matrix");
    int n = m.rows;
    Matrix<T> r(n, n);
    if (n == 1) {
        throw std::invalid_argument("adjugate needs rank >= 2; invert directly");
    }
    Matrix<T> minor(n - 1, n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int rr = 0;
            for (int r = 0; r < n; ++r) {
                if (r == i) continue;
                int cc = 0;
                for (int c = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor.at(rr, cc++) = m.at(r, c);
                }
                ++rr;
            }
            T cof = mat_det(minor);
            if ((i + j) % 2 == 1) cof = -cof;
            r.at(j, i) = std::move(cof);
        }
    return r;
}

}  // namespace pcurv

#endif
