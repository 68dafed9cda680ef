#pragma once

#include <cstddef>
#include <future>
#include <vector>

namespace sirs {

/// Runs `work(block_index, begin, end)` over `n` items split into a fixed
/// number of blocks and returns the per-block results in block order.
///
/// The block layout depends only on `n`, never on the worker count, so any
/// reduction that combines the returned vector front to back is bitwise
/// reproducible on 1 thread or 64.
template <typename Result, typename Work>
std::vector<Result> map_blocks(std::size_t n, const Work& work, int blocks = 16) {
    if (blocks < 1) blocks = 1;
    if (static_cast<std::size_t>(blocks) > n && n > 0) blocks = static_cast<int>(n);
    std::vector<std::future<Result>> futs;
    futs.reserve(blocks);
    const std::size_t per = n / blocks;
    const std::size_t rem = n % blocks;
    std::size_t begin = 0;
    for (int b = 0; b < blocks; ++b) {
        std::size_t len = per + (static_cast<std::size_t>(b) < rem ? 1 : 0);
        std::size_t end = begin + len;
        futs.push_back(std::async(std::launch::async,
                                  [&work, b, begin, end] { return work(b, begin, end); }));
        begin = end;
    }
    std::vector<Result> out;
    out.reserve(blocks);
    for (auto& f : futs) out.push_back(f.get());
    return out;
}

}  // namespace sirs
