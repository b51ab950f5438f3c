#pragma once

#include <span>
#include <string>
#include <vector>

#include "wsoleval/selection.hpp"

namespace wsoleval {

/// Line plot of criterion value against epoch, one polyline per
/// (run, criterion). Values are plotted on a fixed [0,1] axis.
std::string svg_epoch_curves(std::span<const RunManifest> runs, std::span<const Criterion> criteria,
                             Split split = Split::Val);

/// Bar chart of an epoch-difference histogram.
std::string svg_histogram(const EpochDiffHistogram& hist, const std::string& title);

}  // namespace wsoleval
