#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace lueq {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major. The universal numeric carrier for the
/// whole library; sized for small dimensions (<= ~64), value semantics.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, cplx(0.0, 0.0)) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(const std::vector<double>& d);
    static ComplexMatrix diagonal(const std::vector<cplx>& d);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return entries_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    const std::vector<cplx>& entries() const { return entries_; }
    std::vector<cplx>& entries() { return entries_; }

    ComplexMatrix dagger() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;

    cplx trace() const;
    double frobenius_norm() const;
    double max_abs() const;
    bool is_finite() const;

    /// ||m - m^dag||_F <= eps * max(1, ||m||_F)
    bool is_hermitian(double eps) const;

    std::vector<cplx> column(std::size_t j) const;
    void set_column(std::size_t j, const std::vector<cplx>& v);
    void scale_column(std::size_t j, cplx factor);

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(cplx factor);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> entries_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(cplx factor, ComplexMatrix m);
ComplexMatrix operator*(ComplexMatrix m, cplx factor);

/// Kronecker product; composite index (i*b.rows()+k, j*b.cols()+l),
/// first factor major. Matches the subsystem ordering used for states.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// Hilbert-Schmidt inner product tr(a^dag b).
cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace lueq
