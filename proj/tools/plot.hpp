#pragma once

#include <filesystem>
#include <span>
#include <string>

namespace opno::tools {

/// Writes `<stem>.csv` (columns x,u0,ref,pred) and `<stem>.svg`: u0 dashed,
/// reference solid, prediction as markers.
void write_sample_plot(const std::filesystem::path& stem, const std::string& title,
                       std::span<const double> x, std::span<const double> u0,
                       std::span<const double> ref, std::span<const double> pred);

}  // namespace opno::tools
