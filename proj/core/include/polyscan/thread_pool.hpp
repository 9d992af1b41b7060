#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace polyscan {

// Persistent pool for index-parallel loops. Work items must write only to
// their own slot (fn(i) owns index i), which keeps every parallel result
// independent of scheduling and worker count.
class ThreadPool {
public:
    explicit ThreadPool(int workers = 0) {
        int n = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
        if (n < 1) n = 1;
        size_ = n;
        // The calling thread participates, so spawn one fewer.
        for (int i = 0; i < n - 1; ++i) {
            threads_.emplace_back([this] { worker_loop(); });
        }
    }

    ~ThreadPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int size() const { return size_; }

    // Runs fn(i) for every i in [begin, end); blocks until all are done.
    // The first exception thrown by any fn is rethrown here.
    void parallel_for(std::int64_t begin, std::int64_t end,
                      const std::function<void(std::int64_t)>& fn, std::int64_t grain = 16) {
        if (end <= begin) return;
        if (size_ == 1 || end - begin == 1) {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
            return;
        }
        Job job;
        job.fn = &fn;
        job.next.store(begin);
        job.end = end;
        job.grain = std::max<std::int64_t>(grain, 1);
        {
            std::lock_guard lock(mutex_);
            job_ = &job;
            job.active += 1; // the calling thread's registration
            ++generation_;
        }
        cv_.notify_all();
        run_job(job);
        {
            // Close the job under the lock so no late worker can still grab it.
            std::unique_lock lock(mutex_);
            done_cv_.wait(lock, [&] { return job.active == 0; });
            job_ = nullptr;
        }
        if (job.error) std::rethrow_exception(job.error);
    }

private:
    struct Job {
        const std::function<void(std::int64_t)>* fn = nullptr;
        std::atomic<std::int64_t> next{0};
        std::int64_t end = 0;
        std::int64_t grain = 1;
        int active = 0; // guarded by mutex_
        std::exception_ptr error;
        std::mutex error_mutex;
    };

    // Caller must already be registered in job.active.
    void run_job(Job& job) {
        while (true) {
            const std::int64_t start = job.next.fetch_add(job.grain);
            if (start >= job.end) break;
            const std::int64_t stop = std::min(start + job.grain, job.end);
            try {
                for (std::int64_t i = start; i < stop; ++i) (*job.fn)(i);
            } catch (...) {
                std::lock_guard lock(job.error_mutex);
                if (!job.error) job.error = std::current_exception();
                job.next.store(job.end); // drain remaining work
            }
        }
        {
            std::lock_guard lock(mutex_);
            job.active -= 1;
        }
        done_cv_.notify_all();
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        while (true) {
            Job* job = nullptr;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                job = job_;
                if (job) job->active += 1;
            }
            if (job) run_job(*job);
        }
    }

    std::vector<std::thread> threads_;
    int size_ = 1;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    Job* job_ = nullptr;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

} // namespace polyscan
