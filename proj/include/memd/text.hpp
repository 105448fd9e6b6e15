#pragma once

#include <string_view>

namespace memd::detail
{

/// Strips spaces, tabs and carriage returns from both ends.
inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace memd::detail
