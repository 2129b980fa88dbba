#include "opinion_lab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace opinion_lab {

namespace {

std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t parts, std::size_t slot) {
    const std::size_t base = n / parts;
    const std::size_t extra = n % parts;
    const std::size_t begin = slot * base + std::min(slot, extra);
    const std::size_t len = base + (slot < extra ? 1 : 0);
    return {begin, begin + len};
}

}  // namespace

WorkerPool::WorkerPool(std::size_t threads) {
    const std::size_t extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (std::size_t i = 0; i < extra; ++i) {
        workers_.emplace_back([this, i] { worker_loop(i + 1); });
    }
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    start_cv_.notify_all();
    for (auto& w : workers_) w.join();
}

void WorkerPool::parallel_for(std::size_t n,
                              const std::function<void(std::size_t, std::size_t)>& body) {
    if (workers_.empty()) {
        body(0, n);
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        n_ = n;
        pending_ = workers_.size();
        ++generation_;
    }
    start_cv_.notify_all();

    const auto [begin, end] = chunk(n, size(), 0);
    if (begin < end) body(begin, end);

    std::unique_lock lock(mutex_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    body_ = nullptr;
}

void WorkerPool::worker_loop(std::size_t slot) {
    std::size_t seen = 0;
    for (;;) {
        const std::function<void(std::size_t, std::size_t)>* body = nullptr;
        std::size_t n = 0;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
            if (stopping_) return;
            seen = generation_;
            body = body_;
            n = n_;
        }
        const auto [begin, end] = chunk(n, size(), slot);
        if (begin < end) (*body)(begin, end);
        {
            std::lock_guard lock(mutex_);
            --pending_;
        }
        done_cv_.notify_one();
    }
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("OPINION_LAB_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v >= 1) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace opinion_lab
