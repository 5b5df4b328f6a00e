#ifndef GBBMB_TRIDIAG_HPP
#define GBBMB_TRIDIAG_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gbbmb {

/// Prefactorized Thomas solver for a constant-coefficient (Toeplitz)
/// tridiagonal matrix with sub = super = off and main diagonal diag.
/// The sweep coefficients are computed once; each solve is two substitution
/// passes. Requires strict diagonal dominance, which the stepping matrices
/// satisfy for any mu > 0.
class ToeplitzTridiag {
public:
    ToeplitzTridiag() = default;

    ToeplitzTridiag(std::size_t n, double off, double diag) : off_(off) {
        if (n == 0) throw std::invalid_argument("empty tridiagonal system");
        cp_.resize(n);
        pivot_.resize(n);
        pivot_[0] = diag;
        for (std::size_t k = 1; k < n; ++k) {
            cp_[k - 1] = off / pivot_[k - 1];
            pivot_[k] = diag - off * cp_[k - 1];
            if (pivot_[k] == 0.0)
                throw std::runtime_error("singular tridiagonal matrix");
        }
    }

    std::size_t size() const { return pivot_.size(); }

    /// Solves in place: rhs becomes the solution.
    void solve(std::vector<double>& rhs) const {
        const std::size_t n = pivot_.size();
        rhs[0] /= pivot_[0];
        for (std::size_t k = 1; k < n; ++k)
            rhs[k] = (rhs[k] - off_ * rhs[k - 1]) / pivot_[k];
        for (std::size_t k = n - 1; k-- > 0;)
            rhs[k] -= cp_[k] * rhs[k + 1];
    }

private:
    double off_ = 0.0;
    std::vector<double> cp_;    // eliminated superdiagonal
    std::vector<double> pivot_; // forward-sweep pivots
};

} // namespace gbbmb

#endif
