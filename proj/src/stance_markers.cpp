#include "sde/stance_markers.hpp"

namespace sde {

namespace {

bool designated(std::string_view prompt_id) {
  for (std::string_view slug : kDesignatedFamilySlugs) {
    if (prompt_id.size() > slug.size() && prompt_id.substr(0, slug.size()) == slug &&
        prompt_id.substr(slug.size(), 2) == "::")
      return true;
  }
  return false;
}

}  // namespace

PlantedCounts planted_counts(std::string_view prompt_id, Layer layer,
                             std::optional<Variant> variant) {
  if (!designated(prompt_id)) return {};
  switch (layer) {
    case Layer::Surface:
      return {2, 2};
    case Layer::Structural:
      return {1, 1};
    case Layer::Conditional:
      // The planted signal survives the support row and withdraws under
      // counter evidence.
      return variant == Variant::Support ? PlantedCounts{1, 1} : PlantedCounts{};
    case Layer::Meta:
      return {};
  }
  return {};
}

}  // namespace sde
