/// @file io.hpp
/// @brief Field dumps and tabulated-metric input.
#pragma once

#include <filesystem>
#include <string>

#include "cyvortex/geometry.hpp"
#include "cyvortex/grid.hpp"

namespace cyv {

/// CSV with header `t,theta,value`, one row per node in row-major order,
/// values printed with 17 significant digits.
std::string field_csv(const StripGrid& grid, const GridField& field);

/// Reads a tabulated conformal factor from CSV with header `t,theta,lambda`.
/// Rows may come in any order but must cover a uniform tensor grid with
/// theta_j = 2 pi j / n_theta. Throws Error(io) or Error(invalid_argument).
TabulatedSamples read_tabulated_csv(const std::filesystem::path& path);
TabulatedSamples parse_tabulated_csv(const std::string& text);

/// Writes text to path, creating parent directories. Throws Error(io).
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace cyv
