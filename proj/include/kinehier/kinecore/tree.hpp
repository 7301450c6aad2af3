#pragma once

#include "kinehier/kinecore/types.hpp"

#include <string>
#include <vector>

namespace kinehier {

struct TreeViolation {
    std::string invariant;  // e.g. "multiple roots", "cycle detected"
    std::vector<int> part_ids;
};

/// Every broken KinematicTree invariant; empty iff the tree is valid.
std::vector<TreeViolation> validate_tree(const KinematicTree& tree);

/// Throws ValidationError listing the violations, if any.
void require_valid_tree(const KinematicTree& tree);

/// Deterministic DOT digraph. Nodes in ascending part id, edges sorted by
/// (parent, child). Throws ValidationError on an invalid tree.
std::string tree_to_dot(const KinematicTree& tree);

} // namespace kinehier
