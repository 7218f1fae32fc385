#pragma once

#include <string_view>

namespace boxlabel {

/// Warnings for recoverable fallbacks, one `WARN:` line on stderr each.
void log_warning(std::string_view message);

/// Globally mute warnings (tests exercising fallbacks on purpose).
void set_warnings_enabled(bool enabled) noexcept;

}  // namespace boxlabel
