#pragma once

#include <functional>
#include <string>

namespace ridgefind {

// Warnings go to stderr unless a sink is installed (tests capture them).
void warn(const std::string& message);
void set_warning_sink(std::function<void(const std::string&)> sink);

}  // namespace ridgefind
