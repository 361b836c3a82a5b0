#include "recipenet/common.hpp"

#include <algorithm>
#include <iterator>

namespace recipenet {

ItemSet make_item_set(std::vector<IngredientId> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

bool is_subset(const ItemSet& small, const ItemSet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool intersects(const ItemSet& a, const ItemSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

ItemSet set_union(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

ItemSet set_difference(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

ItemSet set_intersection(const ItemSet& a, const ItemSet& b) {
  ItemSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace recipenet
