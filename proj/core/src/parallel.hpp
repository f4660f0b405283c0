#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lppl::detail {

/// Splits [0, count) into `threads` contiguous chunks and runs fn(begin, end) on each.
/// Chunk 0 runs on the calling thread. If several chunks throw, the exception of the
/// lowest chunk is rethrown, which is the one a sequential loop would have hit first.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t threads, Fn&& fn) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
    if (threads == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    const std::size_t base = count / threads;
    const std::size_t extra = count % threads;
    auto chunk_begin = [&](std::size_t c) { return c * base + std::min(c, extra); };

    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads - 1);
        for (std::size_t c = 1; c < threads; ++c) {
            workers.emplace_back([&, c] {
                try {
                    fn(chunk_begin(c), chunk_begin(c + 1));
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
        }
        try {
            fn(chunk_begin(0), chunk_begin(1));
        } catch (...) {
            errors[0] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline std::size_t block_count(std::size_t n, std::size_t block) { return (n + block - 1) / block; }

}  // namespace lppl::detail
