#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace sptucker::detail {

// Fixed set of threads that run one job per worker id and wait for all of
// them. run() returning is the barrier. Worker 0 runs on the calling thread.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers) : size_(workers == 0 ? 1 : workers) {
    for (std::size_t w = 1; w < size_; ++w) threads_.emplace_back([this, w] { loop(w); });
  }

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    start_.notify_all();
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return size_; }

  // Rethrows the first exception raised by any worker.
  void run(const std::function<void(std::size_t)>& job) {
    if (size_ == 1) {
      job(0);
      return;
    }
    {
      std::lock_guard lock(mu_);
      job_ = &job;
      pending_ = size_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    start_.notify_all();
    std::exception_ptr local;
    try {
      job(0);
    } catch (...) {
      local = std::current_exception();
    }
    std::unique_lock lock(mu_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (local) std::rethrow_exception(local);
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void loop(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* job = nullptr;
      {
        std::unique_lock lock(mu_);
        start_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
      }
      std::exception_ptr err;
      try {
        (*job)(w);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mu_);
        if (err && !error_) error_ = err;
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  std::size_t size_;
  std::mutex mu_;
  std::condition_variable start_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
  std::vector<std::jthread> threads_;
};

}  // namespace sptucker::detail
