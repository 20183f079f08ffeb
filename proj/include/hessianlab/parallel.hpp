#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hessianlab {

/// Worker-pool size. HESSIANLAB_THREADS wins over the runtime default.
inline int thread_count()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_thread_count(int threads)
{
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

/// Applies HESSIANLAB_THREADS if set; returns the effective pool size.
inline int configure_threads_from_env(int fallback = 0)
{
    if (const char* env = std::getenv("HESSIANLAB_THREADS")) {
        const int value = std::atoi(env);
        if (value > 0) {
            set_thread_count(value);
            return thread_count();
        }
    }
    if (fallback > 0) set_thread_count(fallback);
    return thread_count();
}

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const auto n = static_cast<std::ptrdiff_t>(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

namespace detail {
inline constexpr std::size_t kReductionBlock = 4096;
}

/// Sum of term(i) over [0, count). Partial sums are formed over fixed blocks and
/// combined in block order, so the result is bit-identical for any thread count.
template <class Term>
double deterministic_sum(std::size_t count, Term&& term)
{
    const std::size_t blocks = (count + detail::kReductionBlock - 1) / detail::kReductionBlock;
    std::vector<double> partial(blocks, 0.0);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * detail::kReductionBlock;
        const std::size_t hi = std::min(count, lo + detail::kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[b] = s;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

template <class Term>
double parallel_max(std::size_t count, Term&& term)
{
    const std::size_t blocks = (count + detail::kReductionBlock - 1) / detail::kReductionBlock;
    std::vector<double> partial(blocks, -std::numeric_limits<double>::infinity());
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * detail::kReductionBlock;
        const std::size_t hi = std::min(count, lo + detail::kReductionBlock);
        double s = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) s = std::max(s, term(i));
        partial[b] = s;
    });
    double best = -std::numeric_limits<double>::infinity();
    for (double p : partial) best = std::max(best, p);
    return best;
}

} // namespace hessianlab
