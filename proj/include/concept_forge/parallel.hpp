#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace cforge {

// Runs fn(begin, end) over contiguous chunks of [0, n) and returns the chunk
// results in chunk order, so merges are independent of scheduling.
template <class Fn>
auto parallel_chunks(std::size_t n, Fn fn, std::size_t min_chunk = 64)
    -> std::vector<decltype(fn(std::size_t{}, std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}, std::size_t{}));
    std::vector<Result> out;
    if (n == 0) return out;
    std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    std::size_t chunks = std::min(workers, (n + min_chunk - 1) / min_chunk);
    if (chunks <= 1) {
        out.push_back(fn(std::size_t{0}, n));
        return out;
    }
    std::size_t step = (n + chunks - 1) / chunks;
    std::vector<std::future<Result>> futures;
    for (std::size_t begin = 0; begin < n; begin += step) {
        std::size_t end = std::min(n, begin + step);
        futures.push_back(std::async(std::launch::async, fn, begin, end));
    }
    out.reserve(futures.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

}  // namespace cforge
