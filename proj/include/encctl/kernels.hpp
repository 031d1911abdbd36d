#pragma once

// Data-parallel kernels. Every kernel has a serial reference and an OpenMP
// variant with identical results; tests compare the two and bench/ times them.

#include "encctl/bootpoly.hpp"

#include <omp.h>

#include <exception>
#include <optional>
#include <span>
#include <vector>

namespace encctl::kernels {

/// max over v of |p(v) - (v mod q)| / |v mod q|.
double max_relative_error_serial(const BootstrapPolynomial& poly, std::span<const double> points);
double max_relative_error_parallel(const BootstrapPolynomial& poly, std::span<const double> points);

/// min over v of (w + g z)(g z - w) with z = v mod q, w = p(v) - z. Non-negative
/// iff every sample lies in the sector of slope g.
double min_sector_product_serial(const BootstrapPolynomial& poly, double g, std::span<const double> points);
double min_sector_product_parallel(const BootstrapPolynomial& poly, double g, std::span<const double> points);

/// Runs fn(i) for i in [0, n) and collects the results in index order. Trials
/// must be independent (own RNG stream, no shared mutable state).
template <class Fn>
auto run_trials_serial(int n, Fn&& fn) -> std::vector<decltype(fn(0))> {
    std::vector<decltype(fn(0))> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
}

template <class Fn>
auto run_trials_parallel(int n, Fn&& fn) -> std::vector<decltype(fn(0))> {
    using R = decltype(fn(0));
    std::vector<std::optional<R>> slots(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
        try {
            slots[i].emplace(fn(i));
        } catch (...) {
#pragma omp critical(encctl_trial_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

}  // namespace encctl::kernels
