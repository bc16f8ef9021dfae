#include "loggpis/error.hpp"

namespace loggpis {

const char *ToString(ErrorCode code) {
    switch (code) {
        case ErrorCode::kInvalidInput: return "invalid input";
        case ErrorCode::kUnsupportedKernel: return "unsupported kernel";
        case ErrorCode::kDimensionMismatch: return "dimension mismatch";
        case ErrorCode::kIllConditioned: return "ill-conditioned model";
        case ErrorCode::kEmptyMap: return "empty map";
        case ErrorCode::kParse: return "parse error";
        case ErrorCode::kIo: return "io error";
        case ErrorCode::kConfig: return "config error";
    }
    return "error";
}

}  // namespace loggpis
