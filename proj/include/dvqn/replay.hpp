#pragma once

#include <cstddef>
#include <vector>

#include "dvqn/nn.hpp"
#include "dvqn/rng.hpp"

namespace dvqn {

struct Transition {
  Vector state;
  int action = 0;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

// Fixed-capacity ring buffer with uniform sampling without replacement.
// Indexing is logical: [0] is the oldest stored transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t logical_index) const;

  // Uniform without replacement; deterministic under the rng stream.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
};

}  // namespace dvqn
