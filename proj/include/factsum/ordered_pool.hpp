#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace factsum {

/// Producer -> worker pool -> order-restoring sink.
///
/// `produce` and `consume` run on the calling thread; `work` runs on `workers`
/// threads. At most `window` items are between production and consumption, so
/// memory stays bounded. Items are consumed in production order. `consume`
/// returning false stops the run early. An exception thrown by `work` is
/// rethrown from here when its item reaches the sink.
template <typename In, typename Out>
void ordered_parallel_map(std::size_t workers, std::size_t window, const std::function<std::optional<In>()>& produce,
                          const std::function<Out(In&)>& work, const std::function<bool(Out&)>& consume) {
  if (workers <= 1) {
    while (auto item = produce()) {
      Out out = work(*item);
      if (!consume(out)) return;
    }
    return;
  }
  if (window < workers) window = workers;

  struct Done {
    std::optional<Out> value;
    std::exception_ptr error;
  };

  std::mutex mu;
  std::condition_variable work_ready;
  std::condition_variable result_ready;
  std::deque<std::pair<std::size_t, In>> queue;
  std::map<std::size_t, Done> done;
  bool shutdown = false;

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        std::pair<std::size_t, In> job;
        {
          std::unique_lock lock(mu);
          work_ready.wait(lock, [&] { return shutdown || !queue.empty(); });
          if (queue.empty()) return;
          job = std::move(queue.front());
          queue.pop_front();
        }
        Done d;
        try {
          d.value.emplace(work(job.second));
        } catch (...) {
          d.error = std::current_exception();
        }
        {
          std::lock_guard lock(mu);
          done.emplace(job.first, std::move(d));
        }
        result_ready.notify_one();
      }
    });
  }

  auto stop = [&] {
    {
      std::lock_guard lock(mu);
      shutdown = true;
      queue.clear();
    }
    work_ready.notify_all();
    for (auto& t : pool) t.join();
  };

  std::size_t produced = 0;
  std::size_t emitted = 0;
  bool exhausted = false;
  try {
    while (true) {
      // Drain everything that is ready, in order.
      while (true) {
        Done d;
        {
          std::lock_guard lock(mu);
          auto it = done.find(emitted);
          if (it == done.end()) break;
          d = std::move(it->second);
          done.erase(it);
        }
        ++emitted;
        if (d.error) std::rethrow_exception(d.error);
        if (!consume(*d.value)) {
          stop();
          return;
        }
      }
      if (!exhausted && produced - emitted < window) {
        auto item = produce();
        if (!item) {
          exhausted = true;
        } else {
          {
            std::lock_guard lock(mu);
            queue.emplace_back(produced++, std::move(*item));
          }
          work_ready.notify_one();
        }
        continue;
      }
      if (exhausted && emitted == produced) break;
      std::unique_lock lock(mu);
      result_ready.wait(lock, [&] { return done.count(emitted) > 0; });
    }
  } catch (...) {
    stop();
    throw;
  }
  stop();
}

}  // namespace factsum
