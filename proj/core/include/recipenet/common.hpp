#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace recipenet {

__extension__ typedef unsigned __int128 u128;  // exact products of two counts

/// Canonical ingredient identifier. Ids are dense (0..n-1) within one lexicon
/// and are assigned in ascending canonical-name order.
struct IngredientId {
  std::uint32_t value = 0;
  auto operator<=>(const IngredientId&) const = default;
};

/// Sorted, duplicate-free list of ingredient ids.
using ItemSet = std::vector<IngredientId>;

ItemSet make_item_set(std::vector<IngredientId> items);
bool is_subset(const ItemSet& small, const ItemSet& big);
bool intersects(const ItemSet& a, const ItemSet& b);
ItemSet set_union(const ItemSet& a, const ItemSet& b);
ItemSet set_difference(const ItemSet& a, const ItemSet& b);
ItemSet set_intersection(const ItemSet& a, const ItemSet& b);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range parameter or invalid configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A domain invariant or precondition does not hold for the given data.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Persisted artifacts disagree with their manifest.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Persisted artifact written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace recipenet

template <>
struct std::hash<recipenet::IngredientId> {
  std::size_t operator()(recipenet::IngredientId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
