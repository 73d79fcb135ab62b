#pragma once

#include <spdlog/spdlog.h>

namespace plates {

// Logger shared by the library. Level is read once from PLATES_LOG
// (trace|debug|info|warn|error|off), default warn.
spdlog::logger &log();

} // namespace plates
