#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "assertfix/hdl/source.hpp"

namespace assertfix {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- hdl_frontend ---------------------------------------------------------

class SyntaxError : public Error {
public:
    SyntaxError(std::string message, hdl::SourcePos pos, std::vector<std::string> expected = {});

    const hdl::SourcePos& pos() const noexcept { return pos_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    hdl::SourcePos pos_;
    std::vector<std::string> expected_;
};

class UnsupportedConstruct : public Error {
public:
    UnsupportedConstruct(std::string construct, hdl::SourceSpan span);

    const std::string& construct() const noexcept { return construct_; }
    const hdl::SourceSpan& span() const noexcept { return span_; }

private:
    std::string construct_;
    hdl::SourceSpan span_;
};

class UnresolvedIdentifier : public Error {
public:
    UnresolvedIdentifier(std::string name, std::string module, hdl::SourceSpan span);

    const std::string& name() const noexcept { return name_; }
    const std::string& module() const noexcept { return module_; }
    const hdl::SourceSpan& span() const noexcept { return span_; }

private:
    std::string name_;
    std::string module_;
    hdl::SourceSpan span_;
};

class UnsupportedSvaFeature : public Error {
public:
    UnsupportedSvaFeature(std::string feature, hdl::SourcePos pos);

    const std::string& feature() const noexcept { return feature_; }

private:
    std::string feature_;
    hdl::SourcePos pos_;
};

// ---- cdfg -------------------------------------------------------------------

class CombinationalLoop : public Error {
public:
    explicit CombinationalLoop(std::vector<std::string> cycle);

    const std::vector<std::string>& cycle() const noexcept { return cycle_; }

private:
    std::vector<std::string> cycle_;
};

class UnknownSignal : public Error {
public:
    explicit UnknownSignal(std::string name);

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// ---- trace ------------------------------------------------------------------

class VcdSyntaxError : public Error {
public:
    VcdSyntaxError(std::string message, int line);

    int line() const noexcept { return line_; }

private:
    int line_;
};

class MissingClock : public Error {
public:
    explicit MissingClock(std::string clock);
};

class SignalMissing : public Error {
public:
    explicit SignalMissing(std::string name);

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class WidthMismatch : public Error {
public:
    using Error::Error;
};

class UnrepresentableShift : public Error {
public:
    using Error::Error;
};

// ---- classify / fix ---------------------------------------------------------

class NoTraces : public Error {
public:
    NoTraces() : Error("no counterexample traces supplied") {}
};

class NoFailure : public Error {
public:
    NoFailure() : Error("assertion passes every supplied trace; nothing to fix") {}
};

class NoDriversFound : public Error {
public:
    using Error::Error;
};

class NoForwardTargets : public Error {
public:
    using Error::Error;
};

// ---- llm_client -------------------------------------------------------------

/// Transport-level failure of a live backend. Callers may fall back to heuristics.
class LlmBackendError : public Error {
public:
    using Error::Error;
};

/// Replay lookup failed. Not a transport error: a replay run without its fixture
/// cannot be reproduced, so callers must not silently fall back.
class FixtureMiss : public Error {
public:
    explicit FixtureMiss(std::string hash);

    const std::string& hash() const noexcept { return hash_; }

private:
    std::string hash_;
};

class MockUnmatched : public Error {
public:
    using Error::Error;
};

// ---- plumbing ---------------------------------------------------------------

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace assertfix
