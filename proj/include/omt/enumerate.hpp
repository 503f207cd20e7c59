#pragma once

#include <vector>

#include "omt/rules.hpp"

namespace omt {

// Exhaustively enumerates every feasible rule in the graph, each exactly
// once, with fully computed statistics. Covers are recomputed per complete
// path by scanning all samples against every condition, deliberately not
// reusing the incremental extension path, so this doubles as an independent
// check of the pricing machinery. Refuses (ConfigError) when the
// length-constrained path count exceeds cap.
std::vector<Rule> enumerate_paths(const FeatureGraph& graph, const BinnedDataset& dataset,
                                  const RuleConfig& config, uint64_t cap);

}  // namespace omt
