#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace afg {

// Library warnings (truncated inputs, tied answer-key modes, ...) go through
// one replaceable sink. The default writes "warning: <msg>" to stderr.
using WarningSink = std::function<void(std::string_view)>;

void warn(std::string_view message);

// Returns the previous sink. An empty sink silences warnings.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace afg
