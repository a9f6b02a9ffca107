#include "rftune/gsa.hpp"

#include "rftune/csv.hpp"

#include <cmath>
#include <numbers>

namespace rftune {

Matrix SobolDesign::stacked() const {
    const Index n = base_size();
    Matrix out((dim + 2) * n, dim);
    out.topRows(n) = A;
    out.middleRows(n, n) = B;
    for (int i = 0; i < dim; ++i) out.middleRows((i + 2) * n, n) = AB[static_cast<std::size_t>(i)];
    return out;
}

SobolDesign make_design(int d, Index n_base, Index skip) {
    if (n_base < 2) throw InvalidArgument("make_design: need at least two base points");
    const Matrix points = sobol_sequence(2 * d, n_base, skip);
    SobolDesign design;
    design.dim = d;
    design.A = points.leftCols(d);
    design.B = points.rightCols(d);
    for (int i = 0; i < d; ++i) {
        Matrix ab = design.A;
        ab.col(i) = design.B.col(i);
        design.AB.push_back(std::move(ab));
    }
    return design;
}

Matrix map_to_box(const Matrix& unit, const Vector& lo, const Vector& hi) {
    if (lo.size() != unit.cols() || hi.size() != unit.cols()) throw DimensionMismatch("map_to_box: bound size mismatch");
    return ((unit.array().rowwise() * (hi - lo).transpose().array()).rowwise() + lo.transpose().array()).matrix();
}

SensitivityIndices estimate_indices(const SobolDesign& design, const Vector& outputs) {
    const Index n = design.base_size();
    const int d = design.dim;
    if (outputs.size() != (d + 2) * n) throw DimensionMismatch("estimate_indices: output count does not match design");
    const Vector fa = outputs.head(n);
    const Vector fb = outputs.segment(n, n);
    Vector both(2 * n);
    both << fa, fb;
    const double mean = both.mean();
    const double variance = (both.array() - mean).square().sum() / static_cast<double>(2 * n - 1);
    if (!(variance > 0.0)) throw ZeroVarianceOutput("estimate_indices: output variance is zero");

    SensitivityIndices s;
    s.variance = variance;
    s.first.resize(d);
    s.total.resize(d);
    s.first_se.resize(d);
    s.total_se.resize(d);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int i = 0; i < d; ++i) {
        const Vector fab = outputs.segment((i + 2) * n, n);
        const Vector saltelli = fb.cwiseProduct(fab - fa);
        const Vector jansen = 0.5 * (fa - fab).array().square().matrix();
        auto sd = [](const Vector& v) {
            const double m = v.mean();
            return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
        };
        s.first[i] = saltelli.mean() / variance;
        s.total[i] = jansen.mean() / variance;
        s.first_se[i] = sd(saltelli) / root_n / variance;
        s.total_se[i] = sd(jansen) / root_n / variance;
    }
    return s;
}

SensitivityIndices estimate_indices(const SobolDesign& design, const std::function<double(const Vector&)>& f) {
    const Matrix points = design.stacked();
    Vector outputs(points.rows());
    for (Index r = 0; r < points.rows(); ++r) outputs[r] = f(points.row(r).transpose());
    return estimate_indices(design, outputs);
}

Vector first_order_indices(const SobolDesign& design, const Vector& outputs) {
    return estimate_indices(design, outputs).first;
}

Vector total_order_indices(const SobolDesign& design, const Vector& outputs) {
    return estimate_indices(design, outputs).total;
}

double ishigami(const Vector& x, double a, double b) {
    if (x.size() != 3) throw DimensionMismatch("ishigami takes three inputs");
    return (1.0 + b * std::pow(x[2], 4)) * std::sin(x[0]) + a * std::pow(std::sin(x[1]), 2);
}

double sobol_g(const Vector& x, const Vector& a) {
    if (x.size() != a.size()) throw DimensionMismatch("sobol_g: x and a differ in length");
    double value = 1.0;
    for (Index i = 0; i < x.size(); ++i) value *= (std::abs(4.0 * x[i] - 2.0) + a[i]) / (1.0 + a[i]);
    return value;
}

Vector sobol_g_coefficients(int d) {
    Vector a(d);
    for (int i = 0; i < d; ++i) a[i] = 0.5 * i;
    return a;
}

AnalyticIndices analytic_ishigami(double a, double b) {
    const double pi4 = std::pow(std::numbers::pi, 4);
    const double pi8 = pi4 * pi4;
    const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
    const double v2 = a * a / 8.0;
    const double v13 = 8.0 * b * b * pi8 / 225.0;
    AnalyticIndices r;
    r.variance = v1 + v2 + v13;
    r.first = Vector(3);
    r.first << v1, v2, 0.0;
    r.first /= r.variance;
    r.total = Vector(3);
    r.total << v1 + v13, v2, v13;
    r.total /= r.variance;
    return r;
}

AnalyticIndices analytic_sobol_g(const Vector& a) {
    if ((a.array() < 0.0).any()) throw InvalidArgument("sobol_g coefficients must be nonnegative");
    const Vector v = ((1.0 / 3.0) / (1.0 + a.array()).square()).matrix();
    const double log_prod = v.array().log1p().sum();
    const double prod = std::exp(log_prod);
    AnalyticIndices r;
    r.variance = std::expm1(log_prod);  // stays accurate when every v_i is tiny
    r.first = v / r.variance;
    r.total.resize(a.size());
    for (Index i = 0; i < a.size(); ++i) r.total[i] = v[i] * prod / (1.0 + v[i]) / r.variance;
    return r;
}

AnalyticIndices analytic_indices(TestFunction tag, int d, const Vector& params) {
    if (tag == TestFunction::ishigami) {
        if (d != 3) throw DimensionMismatch("ishigami is three-dimensional");
        const double a = params.size() > 0 ? params[0] : 7.0;
        const double b = params.size() > 1 ? params[1] : 0.1;
        return analytic_ishigami(a, b);
    }
    return analytic_sobol_g(params.size() == 0 ? sobol_g_coefficients(d) : params);
}

void write_indices_csv(const std::string& path, const SensitivityIndices& s) {
    Matrix rows(s.first.size(), 5);
    for (Index i = 0; i < s.first.size(); ++i) rows.row(i) << i + 1, s.first[i], s.total[i], s.first_se[i], s.total_se[i];
    write_csv(path, {"dimension", "first", "total", "first_se", "total_se"}, rows);
}

}  // namespace rftune
