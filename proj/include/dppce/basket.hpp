#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dppce/errors.hpp"

namespace dppce {

using ItemIndex = std::int32_t;
using ItemSpan = std::span<const ItemIndex>;

/// One observed set of items: non-empty, strictly increasing, duplicate-free.
class Basket {
 public:
  explicit Basket(std::vector<ItemIndex> items) : items_(std::move(items)) {
    if (items_.empty()) throw InputError("basket: empty");
    std::sort(items_.begin(), items_.end());
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (items_[i] < 0) throw InputError("basket: negative item index");
      if (i > 0 && items_[i] == items_[i - 1])
        throw InputError("basket: duplicate item " + std::to_string(items_[i]));
    }
  }

  Basket(std::initializer_list<ItemIndex> items)
      : Basket(std::vector<ItemIndex>(items)) {}

  const std::vector<ItemIndex>& items() const { return items_; }
  ItemSpan span() const { return items_; }
  std::size_t size() const { return items_.size(); }
  ItemIndex max_item() const { return items_.back(); }

  bool contains(ItemIndex item) const {
    return std::binary_search(items_.begin(), items_.end(), item);
  }

  bool operator==(const Basket& other) const = default;

  /// Throws unless every index fits a catalog of num_items items.
  void check_against(ItemIndex num_items) const {
    if (items_.back() >= num_items)
      throw InputError("basket: item " + std::to_string(items_.back()) +
                       " outside catalog of size " + std::to_string(num_items));
  }

 private:
  std::vector<ItemIndex> items_;
};

/// True when every index of a (possibly empty) sorted set fits the catalog.
inline void check_items(ItemSpan items, ItemIndex num_items) {
  for (ItemIndex i : items) {
    if (i < 0 || i >= num_items)
      throw InputError("item index " + std::to_string(i) +
                       " outside catalog of size " + std::to_string(num_items));
  }
}

}  // namespace dppce
