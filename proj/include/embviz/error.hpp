#pragma once

#include <stdexcept>
#include <string>

namespace embviz {

/// Data or validation failure. CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

} // namespace embviz
