#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace soapfilm {

/// Fixed-size bitmap with word-level iteration. Used for cell and facet sets.
class DynamicBitset {
  public:
    DynamicBitset() = default;
    explicit DynamicBitset(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    std::size_t size() const { return n_; }

    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void assign(std::size_t i, bool v) { v ? set(i) : reset(i); }

    void clear() { std::fill(words_.begin(), words_.end(), 0); }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    /// Calls fn(index) for every set bit in ascending order.
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                unsigned b = std::countr_zero(w);
                fn(wi * 64 + b);
                w &= w - 1;
            }
        }
    }

    bool operator==(const DynamicBitset& o) const { return n_ == o.n_ && words_ == o.words_; }

    DynamicBitset& operator|=(const DynamicBitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    DynamicBitset& operator&=(const DynamicBitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    DynamicBitset& operator^=(const DynamicBitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
        return *this;
    }
    /// Set-difference: removes o's bits.
    DynamicBitset& subtract(const DynamicBitset& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    bool intersects(const DynamicBitset& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }

    bool is_subset_of(const DynamicBitset& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    const std::vector<std::uint64_t>& words() const { return words_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace soapfilm
