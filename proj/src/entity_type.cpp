#include "privmt/entity_type.hpp"

#include "privmt/errors.hpp"

namespace privmt {

namespace {

constexpr std::pair<EntityType, std::string_view> kNames[] = {
    {EntityType::PersonName, "PersonName"},
    {EntityType::Location, "Location"},
    {EntityType::Organization, "Organization"},
    {EntityType::Time, "Time"},
    {EntityType::Quantity, "Quantity"},
    {EntityType::Company, "Company"},
    {EntityType::Product, "Product"},
    {EntityType::Work, "Work"},
    {EntityType::Brand, "Brand"},
    {EntityType::Position, "Position"},
    {EntityType::Contextual, "Contextual"},
};

}  // namespace

std::string_view to_string(EntityType type) {
  for (const auto& [value, name] : kNames) {
    if (value == type) return name;
  }
  return "?";
}

std::optional<EntityType> entity_type_from(std::string_view name) {
  for (const auto& [value, canonical] : kNames) {
    if (canonical == name) return value;
  }
  return std::nullopt;
}

const TypeFilter& core_types() {
  static const TypeFilter f{EntityType::PersonName, EntityType::Location,
                            EntityType::Organization};
  return f;
}

const TypeFilter& base_types() {
  static const TypeFilter f{EntityType::PersonName, EntityType::Location,
                            EntityType::Organization, EntityType::Time,
                            EntityType::Quantity};
  return f;
}

const TypeFilter& extended_types() {
  static const TypeFilter f = [] {
    TypeFilter all = base_types();
    all.insert({EntityType::Company, EntityType::Product, EntityType::Work,
                EntityType::Brand, EntityType::Position});
    return all;
  }();
  return f;
}

const TypeFilter& all_types() {
  static const TypeFilter f = [] {
    TypeFilter all = extended_types();
    all.insert(EntityType::Contextual);
    return all;
  }();
  return f;
}

TypeFilter parse_type_filter(std::string_view spec) {
  if (spec == "3-types") return core_types();
  if (spec == "5-types") return base_types();
  if (spec == "10-types") return extended_types();
  if (spec == "all") return all_types();

  TypeFilter filter;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string_view name = spec.substr(pos, comma - pos);
    if (!name.empty()) {
      auto type = entity_type_from(name);
      if (!type) {
        throw ConfigError("unknown entity type '" + std::string(name) + "'");
      }
      filter.insert(*type);
    }
    pos = comma + 1;
  }
  if (filter.empty()) throw ConfigError("empty type filter");
  return filter;
}

std::string type_filter_to_string(const TypeFilter& filter) {
  if (filter == core_types()) return "3-types";
  if (filter == base_types()) return "5-types";
  if (filter == extended_types()) return "10-types";
  if (filter == all_types()) return "all";
  std::string out;
  for (EntityType type : filter) {
    if (!out.empty()) out += ',';
    out += to_string(type);
  }
  return out;
}

}  // namespace privmt
