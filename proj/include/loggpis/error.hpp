#pragma once

#include <stdexcept>
#include <string>

namespace loggpis {

enum class ErrorCode {
    kInvalidInput,
    kUnsupportedKernel,
    kDimensionMismatch,
    kIllConditioned,
    kEmptyMap,
    kParse,
    kIo,
    kConfig,
};

const char *ToString(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(ToString(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace loggpis
