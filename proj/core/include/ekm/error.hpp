#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ekm {

enum class ErrorKind {
    invalid_argument,
    topology_mismatch,
    dimension_mismatch,
    empty_sequence,
    invalid_plan,
    oversized_input,
    fixed_length_required,
    degenerate_normalization,
    domain,
    degenerate_training,
    provenance_mismatch,
    invalid_split,
    schema,
    data,
    io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (and the
/// CLI) can react without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace ekm
