#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace farey {

/// Base of every error raised by the library. `kind()` is the stable name
/// used in machine-readable error records.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
};

#define FAREY_DEFINE_ERROR(NAME, KIND)                                   \
    class NAME : public error {                                          \
    public:                                                              \
        using error::error;                                              \
        const char* kind() const noexcept override { return KIND; }      \
    };

FAREY_DEFINE_ERROR(division_by_zero, "DivisionByZero")
FAREY_DEFINE_ERROR(domain_error, "DomainError")
FAREY_DEFINE_ERROR(zero_input, "ZeroInput")
FAREY_DEFINE_ERROR(depth_exceeded, "DepthExceeded")
FAREY_DEFINE_ERROR(parse_error, "ParseError")
FAREY_DEFINE_ERROR(precondition_failed, "PreconditionFailed")
FAREY_DEFINE_ERROR(no_root_certificate, "NoRootCertificate")
FAREY_DEFINE_ERROR(degenerate_configuration, "DegenerateConfiguration")
FAREY_DEFINE_ERROR(depth_infeasible, "DepthInfeasible")

#undef FAREY_DEFINE_ERROR

/// Raised when a truncated series cannot certify the requested answer.
/// `required_floor` is a hint: the failing step cannot succeed with a
/// floor above it. Lower floors may still be needed.
class insufficient_precision : public error {
public:
    explicit insufficient_precision(const std::string& what,
                                    std::optional<std::int64_t> required_floor = {})
        : error(what), required_floor_(required_floor) {}
    const char* kind() const noexcept override { return "InsufficientPrecision"; }
    std::optional<std::int64_t> required_floor() const noexcept { return required_floor_; }

private:
    std::optional<std::int64_t> required_floor_;
};

} // namespace farey
