#pragma once

#include <condition_variable>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace opinion_lab {

/// Fixed-size pool for index-parallel loops.
///
/// parallel_for splits [0, n) into contiguous chunks, one per worker, and
/// blocks until every chunk is done. Work items must write disjoint outputs;
/// the pool never reorders arithmetic inside an item, so results do not
/// depend on the thread count.
class WorkerPool {
public:
    explicit WorkerPool(std::size_t threads);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    [[nodiscard]] std::size_t size() const { return workers_.size() + 1; }

    void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

private:
    void worker_loop(std::size_t slot);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::size_t n_ = 0;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stopping_ = false;
};

/// Runs body over [0, n) on the pool, or inline when pool is null.
inline void for_each_index(WorkerPool* pool, std::size_t n,
                           const std::function<void(std::size_t, std::size_t)>& body) {
    if (pool == nullptr || pool->size() == 1 || n < 2) {
        body(0, n);
        return;
    }
    pool->parallel_for(n, body);
}

/// Thread count from the OPINION_LAB_THREADS environment variable, falling back
/// to the hardware concurrency.
std::size_t default_thread_count();

}  // namespace opinion_lab
