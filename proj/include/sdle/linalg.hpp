#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "sdle/errors.hpp"

namespace sdle {

/// Dense row-major matrix of doubles. Sized for the small systems this library
/// works with (d up to a few tens); no sparse or blocked paths.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);  // zero-filled
    Matrix(int rows, int cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    Matrix transposed() const;
    double frobenius_norm() const;
    double trace() const;
    bool all_finite() const;
    void fill(double v);

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s);

    friend Matrix operator+(Matrix a, const Matrix& b) { a += b; return a; }
    friend Matrix operator-(Matrix a, const Matrix& b) { a -= b; return a; }
    friend Matrix operator*(Matrix a, double s) { a *= s; return a; }
    friend Matrix operator*(double s, Matrix a) { a *= s; return a; }

    Matrix operator*(const Matrix& rhs) const;
    std::vector<double> operator*(std::span<const double> v) const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// out = a * b; out must be preallocated and distinct from a and b.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
/// out += s * a * b; out must be distinct from a and b.
void matmul_add(const Matrix& a, const Matrix& b, double s, Matrix& out);
/// out = a^T * b; out must be distinct from a and b.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);

/// Q orthogonal and R upper triangular with strictly positive diagonal, so the
/// factorization of a nonsingular square matrix is unique.
struct QrFactors {
    Matrix q;
    Matrix r;
};

/// Householder QR followed by the diagonal sign fix Q <- Q*I, R <- I*R with
/// I_ii = sign(R_ii). Throws RankDeficientError when |R_ii| <= 1e-13 * ||a||_F.
QrFactors qr_signfix(const Matrix& a);

/// In-place variant for hot loops: a is overwritten with R, q receives Q.
void qr_signfix_inplace(Matrix& a, Matrix& q);

/// Q factor of qr_signfix: projection onto the orthogonal group with the
/// positive-diagonal convention, so already-orthogonal input passes through.
Matrix orthonormalize(const Matrix& a);

/// ||q^T q - I||_F, the orthogonality defect used throughout the tests.
double orthogonality_defect(const Matrix& q);

/// Real parts of all eigenvalues in descending order. Hessenberg reduction plus
/// Francis double-shift QR iteration, capped at 500*d sweeps; deterministic
/// cross-check oracle for small systems (d <= 10), not a production eigensolver.
std::vector<double> eigen_real_parts(const Matrix& a);

}  // namespace sdle
