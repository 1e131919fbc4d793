#pragma once

#include <span>
#include <vector>

namespace micromaser {

// Band matrix with kl sub- and ku super-diagonals, stored column-wise with
// kl spare super-rows so an LU factorization can fill in place.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku);

    int size() const { return n_; }
    int lower_bandwidth() const { return kl_; }
    int upper_bandwidth() const { return ku_; }

    // Entry access inside the storage band (including the fill region).
    double& at(int i, int j);
    // Zero outside the nominal band.
    double get(int i, int j) const;

    void apply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> apply(std::span<const double> x) const;

    // this += alpha * other; other's bands must fit inside this one's.
    void axpy(double alpha, const BandedMatrix& other);
    void scale(double alpha);
    void shift_diagonal(double alpha);  // this += alpha * I

    // Largest absolute diagonal entry; a cheap scale for the fastest rate.
    double max_abs_diagonal() const;

private:
    int n_, kl_, ku_, ld_;
    std::vector<double> ab_;

    friend class BandedLU;
};

// LU factorization with partial pivoting in band storage.
class BandedLU {
public:
    // Factorizes a copy; throws SingularOperator on an exact zero pivot.
    explicit BandedLU(BandedMatrix a);

    void solve_in_place(std::span<double> b) const;
    std::vector<double> solve(std::span<const double> b) const;

    double min_abs_pivot() const { return min_pivot_; }

private:
    BandedMatrix f_;
    std::vector<int> pivot_;
    double min_pivot_ = 0.0;
};

} // namespace micromaser
