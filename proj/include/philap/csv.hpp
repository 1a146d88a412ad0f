#pragma once

#include <string>

#include "philap/grid.hpp"

namespace philap {

/// CSV with a header row and one row per grid index: n, u_1, ..., u_N.
/// Values are rendered with 17 significant digits (lossless round trip).
std::string to_csv(const GridFunction& u);
std::string to_csv(const InteriorFunction& h);

/// Parses the formats written by to_csv. Throws std::invalid_argument on a
/// malformed document.
GridFunction grid_from_csv(const std::string& text);
InteriorFunction interior_from_csv(const std::string& text);

}  // namespace philap
