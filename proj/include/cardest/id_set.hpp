#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace cardest {

// Fixed-universe bitset over [0, universe). Used for packet membership, where
// subset tests and unions dominate the inner loop.
class IdSet {
 public:
  IdSet() = default;
  explicit IdSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

  std::size_t universe() const noexcept { return universe_; }

  bool contains(std::size_t i) const noexcept {
    return i < universe_ && ((words_[i / 64] >> (i % 64)) & 1U) != 0;
  }

  // Returns true if i was not present.
  bool insert(std::size_t i) noexcept {
    auto& w = words_[i / 64];
    const std::uint64_t bit = std::uint64_t{1} << (i % 64);
    const bool fresh = (w & bit) == 0;
    w |= bit;
    return fresh;
  }

  void erase(std::size_t i) noexcept { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

  bool is_subset_of(const IdSet& other) const noexcept {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      if ((words_[k] & ~other.words_[k]) != 0) return false;
    }
    return true;
  }

  void unite(const IdSet& other) noexcept {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  void clear() noexcept {
    for (auto& w : words_) w = 0;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      std::uint64_t w = words_[k];
      while (w != 0) {
        const int b = std::countr_zero(w);
        f(k * 64 + static_cast<std::size_t>(b));
        w &= w - 1;
      }
    }
  }

  friend bool operator==(const IdSet&, const IdSet&) = default;

 private:
  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace cardest
