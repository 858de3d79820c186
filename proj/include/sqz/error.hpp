#pragma once

#include <stdexcept>
#include <string>

namespace sqz {

/// Input bytes cannot be decoded: truncated stream, bad codeword, bad container.
class CorruptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, short write).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sqz
