#include "encctl/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace encctl::kernels {

namespace {

inline double relative_error(const BootstrapPolynomial& poly, double v) {
    const double z = centered_mod(v, poly.spec.q);
    return std::abs(evaluate(poly, v) - z) / std::abs(z);
}

inline double sector_product(const BootstrapPolynomial& poly, double g, double v) {
    const double z = centered_mod(v, poly.spec.q);
    const double w = evaluate(poly, v) - z;
    return (w + g * z) * (g * z - w);
}

}  // namespace

double max_relative_error_serial(const BootstrapPolynomial& poly, std::span<const double> points) {
    double worst = 0.0;
    for (double v : points) worst = std::max(worst, relative_error(poly, v));
    return worst;
}

double max_relative_error_parallel(const BootstrapPolynomial& poly, std::span<const double> points) {
    double worst = 0.0;
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    const double* data = points.data();
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) worst = std::max(worst, relative_error(poly, data[i]));
    return worst;
}

double min_sector_product_serial(const BootstrapPolynomial& poly, double g, std::span<const double> points) {
    double lowest = std::numeric_limits<double>::infinity();
    for (double v : points) lowest = std::min(lowest, sector_product(poly, g, v));
    return lowest;
}

double min_sector_product_parallel(const BootstrapPolynomial& poly, double g, std::span<const double> points) {
    double lowest = std::numeric_limits<double>::infinity();
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    const double* data = points.data();
#pragma omp parallel for reduction(min : lowest) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) lowest = std::min(lowest, sector_product(poly, g, data[i]));
    return lowest;
}

}  // namespace encctl::kernels
