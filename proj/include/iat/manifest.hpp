#pragma once

#include "iat/types.hpp"

#include <string>
#include <vector>

namespace iat {

struct Manifest {
  std::string name;
  SkeletonTopology topology;
  Real fps = 0;  // 0 when unspecified
  std::vector<ActionClip> clips;
};

// Parse and validate a manifest file. Malformed entries raise with the
// offending clip id; a joint-count mismatch raises a schema error.
Manifest load_manifest(const std::string& path);

void save_manifest(const Manifest& manifest, const std::string& path);

InteractionRuleSet load_rules(const std::string& path);
void save_rules(const InteractionRuleSet& rules, const std::string& path);

}  // namespace iat
