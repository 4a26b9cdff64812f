#include "vqd/assets.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vqd {

std::optional<std::string_view> find_asset(std::string_view name) {
    for (const auto& [n, content] : detail::embedded_assets())
        if (n == name) return content;
    return std::nullopt;
}

std::string asset(std::string_view name) {
    if (auto a = find_asset(name)) return std::string(*a);
    throw std::out_of_range("no prompt asset named '" + std::string(name) + "'");
}

std::vector<std::string> asset_names() {
    std::vector<std::string> names;
    for (const auto& [n, content] : detail::embedded_assets()) names.emplace_back(n);
    return names;
}

std::string load_text(const std::string& name_or_path) {
    if (auto a = find_asset(name_or_path)) return std::string(*a);
    std::ifstream in(name_or_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + name_or_path + "' (not a shipped asset or a readable file)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace vqd
