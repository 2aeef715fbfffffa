#include "paxrl/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace pax {

namespace {
bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}
}  // namespace

ReplayMemory::ReplayMemory(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (state_dim == 0 || action_dim == 0) {
    throw std::invalid_argument("replay dimensions must be positive");
  }
}

void ReplayMemory::push(Transition t) {
  if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
      t.action.size() != action_dim_) {
    throw std::invalid_argument("replay push: transition shape mismatch");
  }
  if (!std::isfinite(t.reward) || !all_finite(t.state) || !all_finite(t.action) ||
      !all_finite(t.next_state)) {
    throw std::invalid_argument("replay push: non-finite transition");
  }
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (storage_.empty()) throw std::logic_error("replay sample: memory is empty");
  if (batch_size == 0) throw std::invalid_argument("replay sample: batch_size must be >= 1");
  std::uniform_int_distribution<std::size_t> pick(0, storage_.size() - 1);
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(storage_[pick(rng)]);
  return batch;
}

const Transition& ReplayMemory::oldest(std::size_t i) const {
  if (i >= storage_.size()) throw std::out_of_range("replay oldest: index out of range");
  if (storage_.size() < capacity_) return storage_[i];
  return storage_[(head_ + i) % capacity_];
}

}  // namespace pax
