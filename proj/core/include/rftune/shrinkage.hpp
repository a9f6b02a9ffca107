#pragma once

#include "rftune/common.hpp"

namespace rftune {

struct ShrunkCovariance {
    Matrix covariance;
    Vector mean;
    /// Weight on the scaled identity target, in [0, 1].
    double intensity = 0.0;
};

/// Ledoit-Wolf shrinkage of the sample covariance toward mu I, mu = trace / dim.
/// `samples` holds one observation per row; the empirical covariance uses 1/n.
ShrunkCovariance ledoit_wolf(const Matrix& samples);

/// Symmetric inverse square root of an SPD matrix via eigendecomposition.
Matrix inverse_sqrt_spd(const Matrix& spd);
Matrix sqrt_spd(const Matrix& spd);

}  // namespace rftune
