#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace polyspec {

/// Worker count: explicit request, else POLYSPEC_THREADS, else hardware.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("POLYSPEC_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (...) {
        }
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(chunk_index) for chunk_index in [0, n_chunks). The chunk layout
/// is fixed by the caller, so reductions done per chunk and combined in chunk
/// order are identical for any thread count.
template <typename Body>
void parallel_chunks(std::size_t n_chunks, int threads, Body&& body) {
    int workers = std::min<int>(resolve_threads(threads), static_cast<int>(n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < n_chunks; c += workers) body(c);
        });
    }
    for (auto& t : pool) t.join();
}

/// parallel_chunks that rethrows the first exception raised by any chunk.
template <typename Body>
void guarded_chunks(std::size_t n_chunks, int threads, Body&& body) {
    std::exception_ptr err;
    std::mutex mu;
    parallel_chunks(n_chunks, threads, [&](std::size_t c) {
        try {
            body(c);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
        }
    });
    if (err) std::rethrow_exception(err);
}

}  // namespace polyspec
