#pragma once

// Deterministic parallel reductions. Work is cut into a fixed number of
// chunks that does not depend on the thread count, and partial results are
// combined in chunk order, so results are bitwise identical for any number
// of workers.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace aniso
{

namespace detail
{
inline std::atomic<int> &thread_setting()
{
    static std::atomic<int> value{0};
    return value;
}
} // namespace detail

/// Cap the number of worker threads (0 = read ANISO_SPECTRA_THREADS, default 1).
inline void set_thread_count(int n) { detail::thread_setting().store(std::max(n, 0)); }

inline int thread_count()
{
    int n = detail::thread_setting().load();
    if (n > 0)
        return n;
    if (const char *env = std::getenv("ANISO_SPECTRA_THREADS"))
    {
        try
        {
            n = std::stoi(env);
        }
        catch (...)
        {
            n = 1;
        }
        return std::max(n, 1);
    }
    return 1;
}

/// Number of chunks used to split `n` items; fixed for a given n.
inline std::size_t chunk_count(std::size_t n) { return std::min<std::size_t>(n, 64); }

/// Evaluate `body(chunk_index, begin, end)` for every chunk of [0, n),
/// possibly on several threads. Bodies must only write chunk-local state.
template <class Body>
void for_each_chunk(std::size_t n, Body &&body)
{
    const std::size_t chunks = chunk_count(n);
    if (chunks == 0)
        return;
    auto range = [&](std::size_t c) {
        return std::pair<std::size_t, std::size_t>{n * c / chunks, n * (c + 1) / chunks};
    };
    const int workers = std::min<int>(thread_count(), static_cast<int>(chunks));
    if (workers <= 1)
    {
        for (std::size_t c = 0; c < chunks; ++c)
        {
            const auto [b, e] = range(c);
            body(c, b, e);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < chunks; c = next++)
            {
                const auto [b, e] = range(c);
                body(c, b, e);
            }
        });
    for (auto &t : pool)
        t.join();
}

} // namespace aniso
