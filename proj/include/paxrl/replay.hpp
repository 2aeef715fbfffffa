#ifndef PAXRL_REPLAY_HPP
#define PAXRL_REPLAY_HPP

#include <cstddef>
#include <random>
#include <vector>

namespace pax {

// One experience record. `action` is the full critic-input vector (all
// discrete activations followed by all continuous parameters).
struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity FIFO memory with uniform minibatch sampling (with
// replacement). Circular storage, so pushes stay constant-time once the
// buffer is full. Single-threaded access contract.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  void push(Transition t);
  std::vector<Transition> sample(std::size_t batch_size, std::mt19937_64& rng) const;

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }

  // i-th oldest entry (0 = next to be evicted).
  const Transition& oldest(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  std::size_t head_ = 0;  // overwrite position once full
  std::vector<Transition> storage_;
};

}  // namespace pax

#endif
