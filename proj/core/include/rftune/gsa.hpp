#pragma once

// Variance-based global sensitivity analysis: Sobol points, Saltelli first-order and
// Jansen total-order estimators, and two test functions with closed-form indices.

#include "rftune/common.hpp"

#include <functional>
#include <vector>

namespace rftune {

/// Largest dimension with bundled direction numbers.
int sobol_max_dimension();

/// n unscrambled Sobol points in [0,1)^d (Gray-code order). The zero point at index 0 is
/// never emitted: the first row is index skip + 1, so the unskipped sequence starts at 0.5^d.
Matrix sobol_sequence(int d, Index n, Index skip = 0);

/// Base blocks A and B (first and last d coordinates of a 2d-dimensional Sobol
/// sequence) and the cross blocks AB_i: A with column i taken from B.
struct SobolDesign {
    int dim = 0;
    Matrix A;
    Matrix B;
    std::vector<Matrix> AB;

    Index base_size() const { return A.rows(); }
    /// Rows A, then B, then AB_1 ... AB_d: (d + 2) n x d.
    Matrix stacked() const;
};

SobolDesign make_design(int d, Index n_base, Index skip = 0);

/// Maps unit-cube points affinely onto the box [lo, hi].
Matrix map_to_box(const Matrix& unit, const Vector& lo, const Vector& hi);

struct SensitivityIndices {
    Vector first;
    Vector total;
    Vector first_se;
    Vector total_se;
    double variance = 0.0;
};

/// Indices from outputs evaluated on design.stacked() (same row order).
SensitivityIndices estimate_indices(const SobolDesign& design, const Vector& outputs);
SensitivityIndices estimate_indices(const SobolDesign& design, const std::function<double(const Vector&)>& f);

Vector first_order_indices(const SobolDesign& design, const Vector& outputs);
Vector total_order_indices(const SobolDesign& design, const Vector& outputs);

double ishigami(const Vector& x, double a = 7.0, double b = 0.1);
double sobol_g(const Vector& x, const Vector& a);
/// a_i = (i - 1) / 2 for i = 1..d.
Vector sobol_g_coefficients(int d);

enum class TestFunction { ishigami, sobol_g };

struct AnalyticIndices {
    Vector first;
    Vector total;
    double variance = 0.0;
};

AnalyticIndices analytic_ishigami(double a = 7.0, double b = 0.1);
AnalyticIndices analytic_sobol_g(const Vector& a);
/// params: (a, b) for Ishigami (d must be 3), the a_i for the G-function.
AnalyticIndices analytic_indices(TestFunction tag, int d, const Vector& params);

/// Rows: dimension (1-based), first, total, first_se, total_se.
void write_indices_csv(const std::string& path, const SensitivityIndices& indices);

}  // namespace rftune
