#pragma once
#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgeband {

// input that failed to parse; offset points at the offending byte
struct parse_error : std::runtime_error {
    std::size_t byte_offset;
    parse_error(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (byte " + std::to_string(off) + ")"), byte_offset(off) {}
};

// inconsistent or out-of-range configuration
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// invalid argument to a library operation
struct argument_error : std::runtime_error {
    explicit argument_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace edgeband
