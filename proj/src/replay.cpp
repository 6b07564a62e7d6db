#include "dvqn/replay.hpp"

#include <algorithm>

#include "dvqn/errors.hpp"

namespace dvqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw StructuralError("replay: capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::operator[](std::size_t logical_index) const {
  if (logical_index >= size_) throw StructuralError("replay: index out of range");
  if (size_ < capacity_) return storage_[logical_index];
  return storage_[(cursor_ + logical_index) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size > size_)
    throw InsufficientSamplesError("replay: have " + std::to_string(size_) + " transitions, need " +
                                   std::to_string(batch_size));
  // Floyd's algorithm: batch_size distinct indices in [0, size).
  std::vector<std::size_t> chosen;
  chosen.reserve(batch_size);
  for (std::size_t j = size_ - batch_size; j < size_; ++j) {
    const std::size_t candidate =
        static_cast<std::size_t>(rng.uniform_int(static_cast<int>(j) + 1));
    if (std::find(chosen.begin(), chosen.end(), candidate) != chosen.end())
      chosen.push_back(j);
    else
      chosen.push_back(candidate);
  }
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t idx : chosen) batch.push_back((*this)[idx]);
  return batch;
}

}  // namespace dvqn
