#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace privmt {

// Closed taxonomy of privacy entity types. The first five are the base set,
// the next five the extended set, and Contextual marks spans that are
// private through semantic association rather than entity class.
enum class EntityType {
  PersonName,
  Location,
  Organization,
  Time,
  Quantity,
  Company,
  Product,
  Work,
  Brand,
  Position,
  Contextual,
};

std::string_view to_string(EntityType type);

// Rejects anything outside the canonical spellings.
std::optional<EntityType> entity_type_from(std::string_view name);

using TypeFilter = std::set<EntityType>;

// {PersonName, Location, Organization}
const TypeFilter& core_types();
// The full base set of five.
const TypeFilter& base_types();
// Base plus extended, ten types.
const TypeFilter& extended_types();
// Every type including Contextual.
const TypeFilter& all_types();

// Accepts "3-types", "5-types", "10-types", "all", or a comma-separated
// list of canonical type names.
TypeFilter parse_type_filter(std::string_view spec);

std::string type_filter_to_string(const TypeFilter& filter);

}  // namespace privmt
