#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace seisfeat {

/// Read-only window onto samples addressed by absolute channel-grid index.
class SampleView {
 public:
  SampleView() = default;
  SampleView(std::span<const double> samples, std::int64_t first_index)
      : samples_(samples), first_index_(first_index) {}

  std::int64_t begin_index() const { return first_index_; }
  std::int64_t end_index() const {
    return first_index_ + static_cast<std::int64_t>(samples_.size());
  }
  bool contains(std::int64_t begin, std::int64_t end) const {
    return begin >= begin_index() && end <= end_index() && begin <= end;
  }
  /// Samples in [begin, end). Throws seisfeat::Error if not covered.
  std::span<const double> slice(std::int64_t begin, std::int64_t end) const;

 private:
  std::span<const double> samples_;
  std::int64_t first_index_ = 0;
};

/// Growable FIFO of samples for streaming stages. Appends at the tail, drops
/// from the head; indices stay absolute.
class StreamBuffer {
 public:
  explicit StreamBuffer(std::int64_t first_index = 0) : base_(first_index) {}

  void append(std::span<const double> samples);
  /// Forgets samples with index < `index`.
  void discard_before(std::int64_t index);

  std::int64_t begin_index() const { return base_ + static_cast<std::int64_t>(head_); }
  std::int64_t end_index() const {
    return base_ + static_cast<std::int64_t>(data_.size());
  }
  double at(std::int64_t index) const {
    return data_[static_cast<std::size_t>(index - base_)];
  }
  SampleView view() const;

 private:
  std::vector<double> data_;
  std::size_t head_ = 0;
  std::int64_t base_ = 0;  // absolute index of data_[0]
};

}  // namespace seisfeat
