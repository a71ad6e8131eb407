#include "antijam/error.hpp"

namespace antijam {

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace antijam
