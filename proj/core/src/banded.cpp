#include <micromaser/banded.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>

#include <micromaser/errors.hpp>

namespace micromaser {

// Storage: column j holds rows max(0, j-ku-kl)..min(n-1, j+kl) at
// ab_[j*ld_ + kl_ + ku_ + i - j]. The extra kl super-rows take the fill-in
// produced by row pivoting.

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ld_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * kl + ku + 1),
          0.0) {}

double& BandedMatrix::at(int i, int j) {
    return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
}

double BandedMatrix::get(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) return 0.0;
    if (i - j > kl_ || j - i > ku_ + kl_) return 0.0;
    return ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
}

void BandedMatrix::apply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < n_; ++i) {
        const int j0 = std::max(0, i - kl_);
        const int j1 = std::min(n_ - 1, i + ku_);
        double acc = 0.0;
        for (int j = j0; j <= j1; ++j)
            acc += ab_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)] * x[j];
        y[i] = acc;
    }
}

std::vector<double> BandedMatrix::apply(std::span<const double> x) const {
    std::vector<double> y(static_cast<std::size_t>(n_));
    apply(x, y);
    return y;
}

void BandedMatrix::axpy(double alpha, const BandedMatrix& other) {
    for (int j = 0; j < other.n_; ++j) {
        const int i0 = std::max(0, j - other.ku_);
        const int i1 = std::min(other.n_ - 1, j + other.kl_);
        for (int i = i0; i <= i1; ++i)
            at(i, j) += alpha * other.get(i, j);
    }
}

void BandedMatrix::scale(double alpha) {
    for (double& v : ab_) v *= alpha;
}

void BandedMatrix::shift_diagonal(double alpha) {
    for (int i = 0; i < n_; ++i) at(i, i) += alpha;
}

double BandedMatrix::max_abs_diagonal() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(get(i, i)));
    return m;
}

BandedLU::BandedLU(BandedMatrix a) : f_(std::move(a)), pivot_(f_.n_) {
    const int n = f_.n_;
    const int kl = f_.kl_;
    const int ku = f_.ku_;
    min_pivot_ = 0.0;

    for (int k = 0; k < n; ++k) {
        // Partial pivot among rows k..k+kl.
        const int imax = std::min(n - 1, k + kl);
        int p = k;
        double pmax = std::abs(f_.at(k, k));
        for (int i = k + 1; i <= imax; ++i) {
            const double v = std::abs(f_.at(i, k));
            if (v > pmax) {
                pmax = v;
                p = i;
            }
        }
        if (pmax == 0.0)
            throw SingularOperator("banded LU: exact zero pivot column " +
                                   std::to_string(k));
        pivot_[k] = p;
        min_pivot_ = (k == 0) ? pmax : std::min(min_pivot_, pmax);

        const int jmax = std::min(n - 1, k + kl + ku);
        if (p != k)
            for (int j = k; j <= jmax; ++j)
                std::swap(f_.at(k, j), f_.at(p, j));

        const double inv = 1.0 / f_.at(k, k);
        for (int i = k + 1; i <= imax; ++i) f_.at(i, k) *= inv;
        for (int j = k + 1; j <= jmax; ++j) {
            const double ukj = f_.at(k, j);
            if (ukj == 0.0) continue;
            for (int i = k + 1; i <= imax; ++i)
                f_.at(i, j) -= f_.at(i, k) * ukj;
        }
    }
}

void BandedLU::solve_in_place(std::span<double> b) const {
    const int n = f_.n_;
    const int kl = f_.kl_;
    const int ku = f_.ku_;

    for (int k = 0; k < n; ++k) {
        if (pivot_[k] != k) std::swap(b[k], b[pivot_[k]]);
        const int imax = std::min(n - 1, k + kl);
        const double bk = b[k];
        for (int i = k + 1; i <= imax; ++i) b[i] -= f_.get(i, k) * bk;
    }
    for (int k = n - 1; k >= 0; --k) {
        b[k] /= f_.get(k, k);
        const int i0 = std::max(0, k - kl - ku);
        const double bk = b[k];
        for (int i = i0; i < k; ++i) b[i] -= f_.get(i, k) * bk;
    }
}

std::vector<double> BandedLU::solve(std::span<const double> b) const {
    std::vector<double> x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

} // namespace micromaser
