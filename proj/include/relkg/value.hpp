#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace relkg {

enum class ValueKind { Null, Integer, Float, Text };

/// Runtime cell value shared by the relational store, the graph store and
/// both executors.
///
/// Values are totally ordered: null < numbers < text. Integers and floats
/// compare numerically against each other (1 == 1.0); text compares
/// byte-lexicographically.
class Value {
public:
    Value() = default;
    static Value null() { return Value{}; }
    static Value integer(std::int64_t v) { return Value{Payload{v}}; }
    static Value real(double v) { return Value{Payload{v}}; }
    static Value text(std::string v) { return Value{Payload{std::move(v)}}; }

    ValueKind kind() const noexcept { return static_cast<ValueKind>(payload_.index()); }
    bool is_null() const noexcept { return kind() == ValueKind::Null; }
    bool is_numeric() const noexcept {
        return kind() == ValueKind::Integer || kind() == ValueKind::Float;
    }
    bool is_text() const noexcept { return kind() == ValueKind::Text; }

    std::int64_t as_integer() const { return std::get<std::int64_t>(payload_); }
    double as_float() const { return std::get<double>(payload_); }
    const std::string& as_text() const { return std::get<std::string>(payload_); }
    /// Numeric payload widened to double. Requires is_numeric().
    double as_double() const;

    friend std::strong_ordering operator<=>(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

    /// Hash consistent with operator== (integral floats hash like integers).
    std::size_t hash() const noexcept;

    /// SQL-literal style rendering: NULL, 42, 1.5, 'it''s'.
    std::string to_sql_literal() const;
    /// Cypher-literal style rendering: null, 42, 1.5, 'it\'s'.
    std::string to_cypher_literal() const;
    /// Plain rendering for reports (text without quotes, null as NULL).
    std::string to_display() const;

private:
    using Payload = std::variant<std::monostate, std::int64_t, double, std::string>;
    explicit Value(Payload p) : payload_(std::move(p)) {}
    Payload payload_;
};

struct ValueHash {
    std::size_t operator()(const Value& v) const noexcept { return v.hash(); }
};

/// Render a double so that it re-parses to the same value and always carries
/// a decimal point or exponent (so it stays a float on re-read).
std::string format_double(double d);

/// Three-valued comparison used by both executors. Any null operand yields
/// unknown (nullopt); otherwise the Value total order decides.
enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
std::optional<bool> compare_values(CompareOp op, const Value& a, const Value& b);

/// SQL LIKE with `%` and `_` wildcards, case-sensitive. Null operands yield
/// unknown; non-text operands are matched on their display form.
std::optional<bool> like_match(const Value& text, const Value& pattern);

/// Kleene logic helpers.
std::optional<bool> tri_and(std::optional<bool> a, std::optional<bool> b);
std::optional<bool> tri_or(std::optional<bool> a, std::optional<bool> b);
std::optional<bool> tri_not(std::optional<bool> a);

}  // namespace relkg
