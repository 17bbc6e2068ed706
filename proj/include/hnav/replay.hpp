#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hnav/math.hpp"
#include "hnav/mlp.hpp"
#include "hnav/sensing.hpp"

namespace hnav {

/// (s, a, r, s', done). done marks true terminals only; step-cap endings
/// are stored with done = false so they bootstrap.
struct Transition {
  Observation s = Observation::Zero();
  Action a = Action::Zero();
  double r = 0.0;
  Observation s_next = Observation::Zero();
  bool done = false;
};

/// Column-per-sample minibatch.
struct Minibatch {
  Matrix s;       // 26 x n
  Matrix a;       // 3 x n
  Matrix r;       // 1 x n
  Matrix s_next;  // 26 x n
  Matrix done;    // 1 x n, 0 or 1

  Eigen::Index size() const { return s.cols(); }

  static Minibatch from(const std::vector<Transition>& ts) {
    const auto n = static_cast<Eigen::Index>(ts.size());
    Minibatch b{Matrix(kObservationSize, n), Matrix(kActionSize, n), Matrix(1, n),
                Matrix(kObservationSize, n), Matrix(1, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      const Transition& t = ts[static_cast<std::size_t>(i)];
      b.s.col(i) = t.s;
      b.a.col(i) = t.a;
      b.r(0, i) = t.r;
      b.s_next.col(i) = t.s_next;
      b.done(0, i) = t.done ? 1.0 : 0.0;
    }
    return b;
  }
};

/// Fixed-capacity ring buffer; overwrites the oldest entry when full and
/// samples uniformly with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void push(const Transition& t) {
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[cursor_] = t;
    }
    cursor_ = (cursor_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool ready(std::size_t n) const { return n > 0 && data_.size() >= n; }

  /// i-th oldest stored transition.
  const Transition& oldest(std::size_t i) const {
    if (i >= data_.size()) throw std::out_of_range("ReplayBuffer::oldest");
    const std::size_t start = data_.size() < capacity_ ? 0 : cursor_;
    return data_[(start + i) % data_.size()];
  }

  /// Raw slot indices drawn uniformly; empty when fewer than n entries exist.
  std::optional<std::vector<std::size_t>> sample_indices(std::size_t n, Rng& rng) const {
    if (!ready(n)) return std::nullopt;
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = rng.index(data_.size());
    return idx;
  }

  std::optional<Minibatch> sample(std::size_t n, Rng& rng) const {
    auto idx = sample_indices(n, rng);
    if (!idx) return std::nullopt;
    const auto m = static_cast<Eigen::Index>(n);
    Minibatch b{Matrix(kObservationSize, m), Matrix(kActionSize, m), Matrix(1, m),
                Matrix(kObservationSize, m), Matrix(1, m)};
    for (Eigen::Index k = 0; k < m; ++k) {
      const Transition& t = data_[(*idx)[static_cast<std::size_t>(k)]];
      b.s.col(k) = t.s;
      b.a.col(k) = t.a;
      b.r(0, k) = t.r;
      b.s_next.col(k) = t.s_next;
      b.done(0, k) = t.done ? 1.0 : 0.0;
    }
    return b;
  }

  const Transition& slot(std::size_t i) const { return data_.at(i); }

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Transition> data_;
};

}  // namespace hnav
