#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vqd {

/// Prompt text shipped with the library (assets/prompts/*.txt), by file name.
std::optional<std::string_view> find_asset(std::string_view name);

/// Like find_asset, but a missing name is std::out_of_range.
std::string asset(std::string_view name);

std::vector<std::string> asset_names();

/// Contents of a shipped asset when `name_or_path` names one, else of the file at that path.
std::string load_text(const std::string& name_or_path);

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_assets();
}

}  // namespace vqd
