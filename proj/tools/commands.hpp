#pragma once

#include <vector>

#include "cli_support.hpp"

namespace spex::cli {

std::vector<Command> commands();

}  // namespace spex::cli
