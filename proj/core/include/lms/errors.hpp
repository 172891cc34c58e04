#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lms {

// Exit-code classes used by the CLI: 2 input/precondition, 3 cap, 4 assertion.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const { return 2; }
};

class InputError : public Error {
public:
    using Error::Error;
};

class ArityMismatch : public InputError { public: using InputError::InputError; };
class IndexOutOfRange : public InputError { public: using InputError::InputError; };
class FieldMismatch : public InputError { public: using InputError::InputError; };
class EmptyReference : public InputError { public: using InputError::InputError; };
class NotInGroup : public InputError { public: using InputError::InputError; };
class NotClosed : public InputError { public: using InputError::InputError; };
class DepthExhausted : public InputError { public: using InputError::InputError; };

class CapExceeded : public Error {
public:
    CapExceeded(const std::string& what, std::uint64_t required, std::uint64_t cap)
        : Error(what + ": requires " + std::to_string(required) + " (cap " + std::to_string(cap) + ")"),
          required_(required), cap_(cap) {}
    int exit_code() const override { return 3; }
    std::uint64_t required() const { return required_; }
    std::uint64_t cap() const { return cap_; }

private:
    std::uint64_t required_;
    std::uint64_t cap_;
};

// Carries the name of the failed inequality so callers can report it verbatim.
class PreconditionUnmet : public Error {
public:
    explicit PreconditionUnmet(std::string inequality, const std::string& detail = "")
        : Error("precondition unmet: " + inequality + (detail.empty() ? "" : " (" + detail + ")")),
          inequality_(std::move(inequality)) {}
    const std::string& inequality() const { return inequality_; }

private:
    std::string inequality_;
};

class GateUnmet : public PreconditionUnmet { public: using PreconditionUnmet::PreconditionUnmet; };
class EnergyTooLow : public PreconditionUnmet { public: using PreconditionUnmet::PreconditionUnmet; };

class AssertFailed : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
};

// Raised when a set that must be a union of blocks is not; on a valid scheme
// this cannot happen, so it signals an axiom failure upstream.
class NotBlockUnion : public AssertFailed { public: using AssertFailed::AssertFailed; };

}  // namespace lms
