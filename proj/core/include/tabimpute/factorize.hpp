#pragma once

#include "tabimpute/matrix.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace tabimpute {

struct NmfOptions {
    int max_iter = 500;
    double tol = 1e-4; // stop once the relative objective decrease drops below this
    std::uint64_t seed = 42;
};

/// Guard added to multiplicative-update denominators.
inline constexpr double kNmfEpsilon = 1e-9;

struct NmfFactors {
    Matrix W; // n x r, non-negative
    Matrix H; // r x m, non-negative
    /// Squared Frobenius loss at initialisation and after every iteration.
    std::vector<double> objective_trace;

    Matrix reconstruct() const { return W * H; }
};

/// Lee-Seung multiplicative updates for min ||X - WH||_F^2 with W, H >= 0.
/// Throws DataError on negative input or rank outside [1, min(n, m)].
NmfFactors nmf(const Matrix& X, int rank, const NmfOptions& options = {});

struct SvdFactors {
    Matrix U; // n x r, orthonormal columns
    Vector S; // descending, >= 0
    Matrix V; // m x r, orthonormal columns

    Matrix reconstruct() const { return U * S.asDiagonal() * V.transpose(); }
};

/// Top-`rank` singular triplets via randomised subspace iteration (Gaussian
/// test matrix, 10 columns of oversampling, 4 power iterations with QR
/// re-orthonormalisation). Exact whenever rank + 10 >= min(n, m).
SvdFactors truncated_svd(const Matrix& X, int rank, std::uint64_t seed = 0);

/// Smallest r whose leading singular values hold >= 90% of the spectral
/// energy, clamped to [2, min(n, m, 50)].
int choose_rank(const Matrix& X);

enum class FactorizationMethod { NMF, SVD };

std::string_view to_string(FactorizationMethod method);

struct FactorizationOutput {
    Matrix nan_replaced;      // preimputed, with the reconstruction at missing positions
    Matrix fully_transformed; // the reconstruction everywhere
    FactorizationMethod method = FactorizationMethod::NMF;
    int rank = 0;
};

/// NMF when the pre-imputed matrix has no negative entry, truncated SVD
/// otherwise. `encoded` supplies the missing positions.
FactorizationOutput adaptive_factorize(const Matrix& encoded, const Matrix& preimputed,
                                       const NmfOptions& options = {});

} // namespace tabimpute
