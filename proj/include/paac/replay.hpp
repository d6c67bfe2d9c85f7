#pragma once

#include <cstddef>
#include <vector>

#include "paac/common.hpp"
#include "paac/rng.hpp"

namespace paac {

// One experience tuple (x, u, R(x,u), x'). `terminal` marks a true
// absorbing terminal; episode-length truncation stays false so the Bellman
// target keeps bootstrapping.
struct Transition {
  Vec state;
  Vec action;
  double cost = 0.0;
  Vec next_state;
  bool terminal = false;
};

using Batch = std::vector<Transition>;

// Finite memory with FIFO eviction (oldest entry overwritten at capacity)
// and uniform with-replacement sampling from an externally seeded stream.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ContractError("ReplayBuffer: capacity must be >= 1");
    entries_.reserve(capacity_);
  }

  void push(const Transition& t) {
    if (entries_.empty()) {
      state_dim_ = t.state.size();
      action_dim_ = t.action.size();
    }
    if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
        t.action.size() != action_dim_) {
      throw ShapeError("ReplayBuffer::push: transition dims do not match buffer");
    }
    if (!std::isfinite(t.cost) || t.cost < 0.0) {
      throw NumericError("ReplayBuffer::push: cost must be finite and >= 0");
    }
    if (entries_.size() < capacity_) {
      entries_.push_back(t);
    } else {
      entries_[write_cursor_] = t;
    }
    write_cursor_ = (write_cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Entry by age: 0 is the oldest surviving transition.
  const Transition& by_age(std::size_t age) const {
    if (age >= size()) throw ContractError("ReplayBuffer::by_age: out of range");
    if (size() < capacity_) return entries_[age];
    return entries_[(write_cursor_ + age) % capacity_];
  }

  std::size_t sample_index(Rng& rng) const {
    if (entries_.empty()) throw EmptyBufferError("ReplayBuffer::sample: buffer is empty");
    return rng.uniform_index(entries_.size());
  }

  const Transition& sample_one(Rng& rng) const { return entries_[sample_index(rng)]; }

  Batch sample(std::size_t n, Rng& rng) const {
    if (entries_.empty()) throw EmptyBufferError("ReplayBuffer::sample: buffer is empty");
    Batch batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.push_back(entries_[rng.uniform_index(entries_.size())]);
    return batch;
  }

  const std::vector<Transition>& raw_entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::vector<Transition> entries_;
  std::size_t write_cursor_ = 0;
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
};

}  // namespace paac
