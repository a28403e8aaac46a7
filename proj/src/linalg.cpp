#include "sdle/linalg.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <string>

namespace sdle {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw Error(what);
}

}  // namespace

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {
    require(rows >= 1 && cols >= 1, "Matrix: dimensions must be >= 1");
}

Matrix::Matrix(int rows, int cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    require(rows >= 1 && cols >= 1, "Matrix: dimensions must be >= 1");
    require(data_.size() == static_cast<std::size_t>(rows) * cols, "Matrix: entry count mismatch");
    require(all_finite(), "Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    require(rows_ >= 1, "Matrix: empty initializer");
    cols_ = static_cast<int>(rows.begin()->size());
    require(cols_ >= 1, "Matrix: empty row");
    data_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& r : rows) {
        require(static_cast<int>(r.size()) == cols_, "Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require(all_finite(), "Matrix: non-finite entry");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::trace() const {
    require(square(), "trace: matrix must be square");
    double s = 0.0;
    for (int i = 0; i < rows_; ++i) s += (*this)(i, i);
    return s;
}

bool Matrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix& Matrix::operator+=(const Matrix& rhs) {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    require(rows_ == rhs.rows_ && cols_ == rhs.cols_, "operator-=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    Matrix out(rows_, rhs.cols_);
    matmul(*this, rhs, out);
    return out;
}

std::vector<double> Matrix::operator*(std::span<const double> v) const {
    require(static_cast<int>(v.size()) == cols_, "matvec: size mismatch");
    std::vector<double> out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
    require(a.cols() == b.rows(), "matmul: inner dimensions mismatch");
    require(out.rows() == a.rows() && out.cols() == b.cols(), "matmul: bad output shape");
    out.fill(0.0);
    matmul_add(a, b, 1.0, out);
}

void matmul_add(const Matrix& a, const Matrix& b, double s, Matrix& out) {
    const int n = a.rows(), k = a.cols(), m = b.cols();
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < k; ++l) {
            const double ail = s * a(i, l);
            if (ail == 0.0) continue;
            for (int j = 0; j < m; ++j) out(i, j) += ail * b(l, j);
        }
    }
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
    require(a.rows() == b.rows(), "matmul_tn: inner dimensions mismatch");
    require(out.rows() == a.cols() && out.cols() == b.cols(), "matmul_tn: bad output shape");
    out.fill(0.0);
    const int n = a.cols(), k = a.rows(), m = b.cols();
    for (int l = 0; l < k; ++l) {
        for (int i = 0; i < n; ++i) {
            const double ali = a(l, i);
            if (ali == 0.0) continue;
            for (int j = 0; j < m; ++j) out(i, j) += ali * b(l, j);
        }
    }
}

void qr_signfix_inplace(Matrix& a, Matrix& q) {
    require(a.square(), "qr_signfix: matrix must be square");
    const int n = a.rows();
    const double norm_f = a.frobenius_norm();

    if (q.rows() != n || q.cols() != n) q = Matrix::identity(n);
    else {
        q.fill(0.0);
        for (int i = 0; i < n; ++i) q(i, i) = 1.0;
    }

    thread_local std::vector<double> v;
    v.assign(static_cast<std::size_t>(n), 0.0);

    for (int k = 0; k + 1 < n; ++k) {
        double sigma2 = 0.0;
        for (int i = k; i < n; ++i) sigma2 += a(i, k) * a(i, k);
        const double sigma = std::sqrt(sigma2);
        if (sigma == 0.0) continue;  // zero column; rank check fires below

        const double akk = a(k, k);
        const double alpha = (akk >= 0.0) ? -sigma : sigma;
        v[k] = akk - alpha;
        for (int i = k + 1; i < n; ++i) v[i] = a(i, k);
        const double vnorm2 = sigma2 - 2.0 * alpha * akk + alpha * alpha;
        if (vnorm2 <= 0.0) continue;
        const double beta = 2.0 / vnorm2;

        // A <- (I - beta v v^T) A on the trailing columns
        a(k, k) = alpha;
        for (int i = k + 1; i < n; ++i) a(i, k) = 0.0;
        for (int j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (int i = k; i < n; ++i) s += v[i] * a(i, j);
            s *= beta;
            for (int i = k; i < n; ++i) a(i, j) -= s * v[i];
        }
        // Q <- Q (I - beta v v^T)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k; j < n; ++j) s += q(i, j) * v[j];
            s *= beta;
            for (int j = k; j < n; ++j) q(i, j) -= s * v[j];
        }
    }

    // uniqueness: flip signs so every diagonal entry of R is positive
    for (int i = 0; i < n; ++i) {
        if (a(i, i) < 0.0) {
            for (int j = i; j < n; ++j) a(i, j) = -a(i, j);
            for (int r = 0; r < n; ++r) q(r, i) = -q(r, i);
        }
    }
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) a(i, j) = 0.0;

    const double thresh = 1e-13 * norm_f;
    for (int i = 0; i < n; ++i) {
        if (std::abs(a(i, i)) <= thresh)
            throw RankDeficientError("qr_signfix: rank-deficient input (|R_" + std::to_string(i) +
                                     std::to_string(i) + "| below threshold)");
    }
}

QrFactors qr_signfix(const Matrix& a) {
    QrFactors f;
    f.r = a;
    qr_signfix_inplace(f.r, f.q);
    return f;
}

Matrix orthonormalize(const Matrix& a) {
    Matrix r = a;
    Matrix q;
    qr_signfix_inplace(r, q);
    return q;
}

double orthogonality_defect(const Matrix& q) {
    require(q.square(), "orthogonality_defect: matrix must be square");
    const int n = q.rows();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double g = 0.0;
            for (int k = 0; k < n; ++k) g += q(k, i) * q(k, j);
            if (i == j) g -= 1.0;
            s += g * g;
        }
    }
    return std::sqrt(s);
}

namespace {

// In-place Householder similarity reduction to upper Hessenberg form.
void hessenberg(Matrix& h) {
    const int n = h.rows();
    std::vector<double> v(n, 0.0);
    for (int k = 0; k + 2 < n; ++k) {
        double sigma2 = 0.0;
        for (int i = k + 1; i < n; ++i) sigma2 += h(i, k) * h(i, k);
        const double sigma = std::sqrt(sigma2);
        if (sigma == 0.0) continue;
        const double x0 = h(k + 1, k);
        const double alpha = (x0 >= 0.0) ? -sigma : sigma;
        v[k + 1] = x0 - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
        const double vnorm2 = sigma2 - 2.0 * alpha * x0 + alpha * alpha;
        if (vnorm2 <= 0.0) continue;
        const double beta = 2.0 / vnorm2;

        // left: H <- P H
        for (int j = k; j < n; ++j) {
            double s = 0.0;
            for (int i = k + 1; i < n; ++i) s += v[i] * h(i, j);
            s *= beta;
            for (int i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
        }
        // right: H <- H P
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += h(i, j) * v[j];
            s *= beta;
            for (int j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
        }
        h(k + 1, k) = alpha;
        for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

// One implicit Francis double-shift sweep on the active block [l, p] of h,
// with the shift polynomial provided through (s, t) = (sum, product) of shifts.
void francis_sweep(Matrix& h, int l, int p, double s, double t) {
    const int n = h.rows();
    double x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - s * h(l, l) + t;
    double y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - s);
    double z = (l + 2 <= p) ? h(l + 1, l) * h(l + 2, l + 1) : 0.0;

    for (int k = l; k <= p - 2; ++k) {
        // Householder on (x, y, z)
        const double nrm = std::sqrt(x * x + y * y + z * z);
        if (nrm != 0.0) {
            const double alpha = (x >= 0.0) ? -nrm : nrm;
            double v0 = x - alpha, v1 = y, v2 = z;
            const double vnorm2 = v0 * v0 + v1 * v1 + v2 * v2;
            if (vnorm2 > 0.0) {
                const double beta = 2.0 / vnorm2;
                const int q0 = std::max(l, k - 1);
                for (int j = q0; j < n; ++j) {
                    double u = v0 * h(k, j) + v1 * h(k + 1, j) + v2 * h(k + 2, j);
                    u *= beta;
                    h(k, j) -= u * v0;
                    h(k + 1, j) -= u * v1;
                    h(k + 2, j) -= u * v2;
                }
                const int r1 = std::min(k + 3, p);
                for (int i = 0; i <= r1; ++i) {
                    double u = v0 * h(i, k) + v1 * h(i, k + 1) + v2 * h(i, k + 2);
                    u *= beta;
                    h(i, k) -= u * v0;
                    h(i, k + 1) -= u * v1;
                    h(i, k + 2) -= u * v2;
                }
            }
        }
        x = h(k + 1, k);
        y = h(k + 2, k);
        z = (k + 3 <= p) ? h(k + 3, k) : 0.0;
    }

    // trailing 2x1 reflector zeroing h(p, p-2)... handled via (x, y)
    const double nrm = std::sqrt(x * x + y * y);
    if (nrm != 0.0) {
        const double alpha = (x >= 0.0) ? -nrm : nrm;
        double v0 = x - alpha, v1 = y;
        const double vnorm2 = v0 * v0 + v1 * v1;
        if (vnorm2 > 0.0) {
            const double beta = 2.0 / vnorm2;
            const int k = p - 1;
            for (int j = std::max(l, k - 1); j < n; ++j) {
                double u = v0 * h(k, j) + v1 * h(k + 1, j);
                u *= beta;
                h(k, j) -= u * v0;
                h(k + 1, j) -= u * v1;
            }
            for (int i = 0; i <= p; ++i) {
                double u = v0 * h(i, k) + v1 * h(i, k + 1);
                u *= beta;
                h(i, k) -= u * v0;
                h(i, k + 1) -= u * v1;
            }
        }
    }
}

}  // namespace

std::vector<double> eigen_real_parts(const Matrix& a) {
    require(a.square(), "eigen_real_parts: matrix must be square");
    require(a.all_finite(), "eigen_real_parts: non-finite entry");
    const int n = a.rows();
    require(n <= 10, "eigen_real_parts: oracle is limited to d <= 10");

    Matrix h = a;
    hessenberg(h);

    const double anorm = std::max(h.frobenius_norm(), DBL_MIN);
    const int iter_cap = 500 * n;
    int iter_total = 0;
    int iter_block = 0;

    int p = n - 1;
    while (p > 0) {
        // deflate a converged 1x1 tail
        double thresh = DBL_EPSILON * (std::abs(h(p - 1, p - 1)) + std::abs(h(p, p)));
        if (thresh == 0.0) thresh = DBL_EPSILON * anorm;
        if (std::abs(h(p, p - 1)) <= thresh) {
            h(p, p - 1) = 0.0;
            --p;
            iter_block = 0;
            continue;
        }
        // active block start
        int l = p - 1;
        while (l > 0) {
            double th = DBL_EPSILON * (std::abs(h(l - 1, l - 1)) + std::abs(h(l, l)));
            if (th == 0.0) th = DBL_EPSILON * anorm;
            if (std::abs(h(l, l - 1)) <= th) {
                h(l, l - 1) = 0.0;
                break;
            }
            --l;
        }
        if (p - l == 1) {
            // 2x2 block: resolved in the extraction pass
            p -= 2;
            iter_block = 0;
            continue;
        }
        if (++iter_total > iter_cap)
            throw NoConvergenceError("eigen_real_parts: QR iteration exceeded its cap");
        ++iter_block;

        double s, t;
        if (iter_block % 10 == 0) {
            // exceptional shift to break symmetry-induced stalls
            const double w = std::abs(h(p, p - 1)) + std::abs(h(p - 1, p - 2));
            s = 1.5 * w;
            t = w * w;
        } else {
            s = h(p - 1, p - 1) + h(p, p);
            t = h(p - 1, p - 1) * h(p, p) - h(p - 1, p) * h(p, p - 1);
        }
        francis_sweep(h, l, p, s, t);
    }

    std::vector<double> re;
    re.reserve(n);
    int i = 0;
    while (i < n) {
        if (i == n - 1 || h(i + 1, i) == 0.0) {
            re.push_back(h(i, i));
            ++i;
        } else {
            const double tr = h(i, i) + h(i + 1, i + 1);
            const double det = h(i, i) * h(i + 1, i + 1) - h(i, i + 1) * h(i + 1, i);
            const double disc = 0.25 * tr * tr - det;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                re.push_back(0.5 * tr + r);
                re.push_back(0.5 * tr - r);
            } else {
                re.push_back(0.5 * tr);
                re.push_back(0.5 * tr);
            }
            i += 2;
        }
    }
    std::sort(re.begin(), re.end(), std::greater<double>());
    return re;
}

}  // namespace sdle
