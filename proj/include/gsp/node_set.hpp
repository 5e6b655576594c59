#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

namespace gsp {

// Nodes are 0-based internally. External formats are 1-based.
using Node = int;

// Fixed-capacity bitset over node indices. Every graph and conditioning set in
// the library is one of these, so set algebra on parents, ancestors and
// separating sets is a handful of word operations.
class NodeSet {
 public:
  static constexpr int kWords = 4;
  static constexpr int kCapacity = 64 * kWords;

  NodeSet() = default;
  NodeSet(std::initializer_list<Node> nodes) {
    for (Node v : nodes) insert(v);
  }
  explicit NodeSet(const std::vector<Node>& nodes) {
    for (Node v : nodes) insert(v);
  }

  // {0, ..., count-1}
  static NodeSet Range(int count) {
    NodeSet s;
    for (int v = 0; v < count; ++v) s.insert(v);
    return s;
  }

  void insert(Node v) { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
  void erase(Node v) { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }
  bool contains(Node v) const { return (words_[v >> 6] >> (v & 63)) & 1U; }

  int size() const {
    int n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
  }
  bool empty() const {
    for (auto w : words_)
      if (w != 0) return false;
    return true;
  }

  // Smallest member, or -1 when empty.
  Node first() const {
    for (int k = 0; k < kWords; ++k)
      if (words_[k] != 0) return 64 * k + std::countr_zero(words_[k]);
    return -1;
  }

  template <typename F>
  void for_each(F&& f) const {
    for (int k = 0; k < kWords; ++k) {
      std::uint64_t w = words_[k];
      while (w != 0) {
        f(64 * k + std::countr_zero(w));
        w &= w - 1;
      }
    }
  }

  std::vector<Node> members() const {
    std::vector<Node> out;
    out.reserve(size());
    for_each([&](Node v) { out.push_back(v); });
    return out;
  }

  bool is_subset_of(const NodeSet& other) const {
    for (int k = 0; k < kWords; ++k)
      if ((words_[k] & ~other.words_[k]) != 0) return false;
    return true;
  }
  bool intersects(const NodeSet& other) const {
    for (int k = 0; k < kWords; ++k)
      if ((words_[k] & other.words_[k]) != 0) return true;
    return false;
  }

  NodeSet& operator|=(const NodeSet& o) {
    for (int k = 0; k < kWords; ++k) words_[k] |= o.words_[k];
    return *this;
  }
  NodeSet& operator&=(const NodeSet& o) {
    for (int k = 0; k < kWords; ++k) words_[k] &= o.words_[k];
    return *this;
  }
  NodeSet& operator-=(const NodeSet& o) {
    for (int k = 0; k < kWords; ++k) words_[k] &= ~o.words_[k];
    return *this;
  }
  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
  friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

  NodeSet with(Node v) const {
    NodeSet s = *this;
    s.insert(v);
    return s;
  }
  NodeSet without(Node v) const {
    NodeSet s = *this;
    s.erase(v);
    return s;
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  // Colexicographic order on the bit pattern; any strict total order works for
  // the sorted containers that use it.
  friend bool operator<(const NodeSet& a, const NodeSet& b) {
    for (int k = kWords - 1; k >= 0; --k)
      if (a.words_[k] != b.words_[k]) return a.words_[k] < b.words_[k];
    return false;
  }

  std::size_t hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto w : words_) {
      h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }

  const std::array<std::uint64_t, kWords>& words() const { return words_; }

 private:
  std::array<std::uint64_t, kWords> words_{};
};

}  // namespace gsp

template <>
struct std::hash<gsp::NodeSet> {
  std::size_t operator()(const gsp::NodeSet& s) const noexcept { return s.hash(); }
};
