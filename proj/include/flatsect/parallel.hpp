#pragma once

// Deterministic chunked execution. A run of n_samples is cut into a fixed
// number of chunks; chunk i always draws from rng.substream(i) and results
// are returned in chunk order, so the output depends on the chunk layout
// but not on the number of worker threads.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flatsect/errors.hpp"
#include "flatsect/random.hpp"

namespace flatsect {

struct Parallelism {
    int chunks = 16;
    int threads = 1;
};

/// Worker count capped by FLATSECT_THREADS when set to a positive integer.
inline int threads_from_env(int requested) {
    int threads = std::max(1, requested);
    if (const char* env = std::getenv("FLATSECT_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) threads = std::min<long>(threads, cap);
    }
    return threads;
}

/// Default parallelism: one thread per hardware core, capped by FLATSECT_THREADS.
inline Parallelism default_parallelism(int chunks = 16) {
    const unsigned hw = std::thread::hardware_concurrency();
    return {chunks, threads_from_env(hw == 0 ? 1 : static_cast<int>(hw))};
}

/// Size of chunk `index` when `total` items are split into `chunks` parts.
inline std::int64_t chunk_size(std::int64_t total, int chunks, int index) {
    const std::int64_t base = total / chunks;
    return base + (index < total % chunks ? 1 : 0);
}

/// Runs fn(chunk_index, chunk_count, stream) for every chunk and returns the
/// results in chunk order. The first exception, by chunk index, is rethrown.
template <class F>
auto run_chunked(std::int64_t total, const RandomStream& rng, const Parallelism& par, F&& fn)
    -> std::vector<decltype(fn(0, std::int64_t{0}, std::declval<RandomStream&>()))> {
    using R = decltype(fn(0, std::int64_t{0}, std::declval<RandomStream&>()));
    if (total < 0) throw DomainError("run_chunked: negative sample count");
    if (par.chunks < 1) throw DomainError("run_chunked: chunks must be >= 1");
    const int chunks = par.chunks;
    std::vector<R> results(chunks);
    std::vector<std::exception_ptr> errors(chunks);

    auto work = [&](int i) {
        try {
            RandomStream stream = rng.substream(static_cast<std::uint64_t>(i));
            results[i] = fn(i, chunk_size(total, chunks, i), stream);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    const int threads = std::clamp(par.threads, 1, chunks);
    if (threads == 1) {
        for (int i = 0; i < chunks; ++i) work(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int i = next++; i < chunks; i = next++) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace flatsect
