#pragma once

#include <span>
#include <string>
#include <vector>

#include "auctionvi/dynamics.hpp"
#include "auctionvi/minty.hpp"

namespace auctionvi {

// Self-contained SVG of a two-slope vector field: arrows scaled by
// gradient norm (clamped), translucent red cells where the Minty condition
// is violated, a star at the equilibrium, optional streamlines.
std::string render_flow_svg(const FlowField& field,
                            const ViolationMap* violations,
                            const std::vector<Trajectory>& streamlines,
                            double star_b1, double star_b2,
                            const std::string& title,
                            std::span<const std::string> config_lines = {});

void write_flow_svg(const std::string& path, const FlowField& field,
                    const ViolationMap* violations,
                    const std::vector<Trajectory>& streamlines,
                    double star_b1, double star_b2, const std::string& title,
                    std::span<const std::string> config_lines = {});

}  // namespace auctionvi
