#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "assertfix/hdl/expr.hpp"

namespace assertfix::trace {

/// Three-valued scalar or vector of up to 64 bits. A vector with any x/z bit
/// is unknown as a whole.
struct Value {
    std::uint32_t width = 1;
    bool known = true;
    std::uint64_t bits = 0;

    static Value of(std::uint32_t width, std::uint64_t bits);
    static Value unknown(std::uint32_t width);
    static Value boolean(bool b) { return of(1, b ? 1 : 0); }

    /// Truth value: nullopt when unknown.
    std::optional<bool> truth() const noexcept {
        if (!known) return std::nullopt;
        return bits != 0;
    }

    friend bool operator==(const Value& a, const Value& b) noexcept {
        return a.width == b.width && a.known == b.known && (!a.known || a.bits == b.bits);
    }

    /// `1'b0`-style text for small widths, hex otherwise; `x` when unknown.
    std::string to_string() const;
};

/// Where an expression reads its signal values.
class ValueSource {
public:
    virtual ~ValueSource() = default;
    /// Declared width of the signal; throws if unknown to the source.
    virtual std::uint32_t width(const std::string& name) const = 0;
    /// Index of the least significant bit for bit/part selects.
    virtual int lsb(const std::string&) const { return 0; }
    /// Value at `cycle`; negative cycles yield unknown.
    virtual Value at(const std::string& name, int cycle) const = 0;
};

/// Self-determined width of an expression.
std::uint32_t self_width(const hdl::Expr& e, const ValueSource& src);

/// Evaluate at `cycle` with Verilog context-determined sizing.
Value evaluate_expr(const hdl::Expr& e, const ValueSource& src, int cycle);

} // namespace assertfix::trace
