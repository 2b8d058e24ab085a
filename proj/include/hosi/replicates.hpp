#pragma once

// Replicate-partitioned evaluation.  Replicates are cut into fixed-size
// chunks; workers claim chunks, summarize them, and the summaries are merged
// in chunk order.  Results therefore do not depend on the worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "hosi/core.hpp"

namespace hosi {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Count, compensated sum and centered sum of squares of one column of
/// per-replicate contributions.
struct ColumnSummary {
    std::uint64_t count = 0;
    CompensatedSum sum;
    double m2 = 0.0;

    double mean() const noexcept { return count ? sum.value() / static_cast<double>(count) : 0.0; }
    /// Sample variance (n-1 denominator); zero for fewer than two values.
    double variance() const noexcept {
        return count > 1 ? std::max(m2, 0.0) / static_cast<double>(count - 1) : 0.0;
    }
    double std_error() const noexcept {
        return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
    }

    static ColumnSummary of(std::span<const double> values) {
        ColumnSummary s;
        s.count = values.size();
        for (double v : values) s.sum.add(v);
        const double m = s.mean();
        CompensatedSum sq;
        for (double v : values) sq.add((v - m) * (v - m));
        s.m2 = sq.value();
        return s;
    }

    /// Chan et al. pairwise merge.
    void merge(const ColumnSummary& o) {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count), nb = static_cast<double>(o.count);
        const double delta = o.mean() - mean();
        m2 = m2 + o.m2 + delta * delta * na * nb / (na + nb);
        count += o.count;
        sum.add(o.sum.value());
    }
};

/// Summary of all columns produced by a replicate kernel.
struct ReplicateSummary {
    std::vector<ColumnSummary> columns;
    std::uint64_t n = 0;

    const ColumnSummary& operator[](std::size_t c) const { return columns.at(c); }
};

inline constexpr std::uint64_t kChunkSize = 2048;

inline unsigned resolve_workers(unsigned workers) {
    if (workers != 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1u;
}

/// Runs `kernel(first, count, out)` over replicates [0, n) in chunks.  The
/// kernel writes `count * ncols` contributions, replicate-major, into `out`.
template <class Kernel>
ReplicateSummary run_replicates(std::uint64_t n, std::size_t ncols, unsigned workers, Kernel&& kernel) {
    const std::uint64_t nchunks = (n + kChunkSize - 1) / kChunkSize;
    std::vector<std::vector<ColumnSummary>> chunk_summaries(nchunks);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::atomic<bool> failed{false};

    auto work = [&] {
        std::vector<double> buf;
        std::vector<double> column;
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::uint64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            const std::uint64_t first = c * kChunkSize;
            const std::uint64_t count = std::min(kChunkSize, n - first);
            try {
                buf.assign(count * ncols, 0.0);
                kernel(first, count, std::span<double>(buf));
                auto& out = chunk_summaries[c];
                out.resize(ncols);
                column.resize(count);
                for (std::size_t col = 0; col < ncols; ++col) {
                    for (std::uint64_t i = 0; i < count; ++i) column[i] = buf[i * ncols + col];
                    out[col] = ColumnSummary::of(column);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                failed = true;
                return;
            }
        }
    };

    const unsigned nworkers =
        static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(nchunks, 1)));
    if (nworkers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (unsigned w = 0; w < nworkers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    ReplicateSummary total;
    total.n = n;
    total.columns.resize(ncols);
    for (const auto& chunk : chunk_summaries)
        for (std::size_t col = 0; col < ncols; ++col) total.columns[col].merge(chunk[col]);
    return total;
}

}  // namespace hosi
