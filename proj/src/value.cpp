#include "relkg/value.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <vector>

namespace relkg {

namespace {

int kind_rank(ValueKind k) {
    switch (k) {
        case ValueKind::Null: return 0;
        case ValueKind::Integer:
        case ValueKind::Float: return 1;
        case ValueKind::Text: return 2;
    }
    return 0;
}

std::strong_ordering compare_mixed(std::int64_t i, double d) {
    // long double carries a 64-bit mantissa on x86, so the widening is exact.
    const long double li = static_cast<long double>(i);
    const long double ld = static_cast<long double>(d);
    if (li < ld) return std::strong_ordering::less;
    if (li > ld) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::strong_ordering compare_doubles(double a, double b) {
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace

double Value::as_double() const {
    if (kind() == ValueKind::Integer) return static_cast<double>(as_integer());
    return as_float();
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
    const int ra = kind_rank(a.kind());
    const int rb = kind_rank(b.kind());
    if (ra != rb) return ra <=> rb;
    switch (a.kind()) {
        case ValueKind::Null: return std::strong_ordering::equal;
        case ValueKind::Text: {
            const int c = a.as_text().compare(b.as_text());
            return c < 0 ? std::strong_ordering::less
                         : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
        }
        case ValueKind::Integer:
            if (b.kind() == ValueKind::Integer) return a.as_integer() <=> b.as_integer();
            return compare_mixed(a.as_integer(), b.as_float());
        case ValueKind::Float:
            if (b.kind() == ValueKind::Float) return compare_doubles(a.as_float(), b.as_float());
            return 0 <=> compare_mixed(b.as_integer(), a.as_float());
    }
    return std::strong_ordering::equal;
}

std::size_t Value::hash() const noexcept {
    switch (kind()) {
        case ValueKind::Null: return 0x9e3779b97f4a7c15ULL;
        case ValueKind::Integer: return std::hash<std::int64_t>{}(as_integer());
        case ValueKind::Float: {
            const double d = as_float();
            if (std::trunc(d) == d && d >= -9.2e18 && d <= 9.2e18) {
                return std::hash<std::int64_t>{}(static_cast<std::int64_t>(d));
            }
            return std::hash<double>{}(d);
        }
        case ValueKind::Text: return std::hash<std::string>{}(as_text());
    }
    return 0;
}

std::string format_double(double d) {
    if (std::isnan(d)) return "NaN";
    if (std::isinf(d)) return d > 0 ? "Infinity" : "-Infinity";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string out(buf, end);
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

std::string Value::to_sql_literal() const {
    switch (kind()) {
        case ValueKind::Null: return "NULL";
        case ValueKind::Integer: return std::to_string(as_integer());
        case ValueKind::Float: return format_double(as_float());
        case ValueKind::Text: {
            std::string out = "'";
            for (char c : as_text()) {
                if (c == '\'') out += '\'';
                out += c;
            }
            return out + "'";
        }
    }
    return {};
}

std::string Value::to_cypher_literal() const {
    switch (kind()) {
        case ValueKind::Null: return "null";
        case ValueKind::Integer: return std::to_string(as_integer());
        case ValueKind::Float: return format_double(as_float());
        case ValueKind::Text: {
            std::string out = "'";
            for (char c : as_text()) {
                if (c == '\'' || c == '\\') out += '\\';
                out += c;
            }
            return out + "'";
        }
    }
    return {};
}

std::string Value::to_display() const {
    switch (kind()) {
        case ValueKind::Null: return "NULL";
        case ValueKind::Integer: return std::to_string(as_integer());
        case ValueKind::Float: return format_double(as_float());
        case ValueKind::Text: return as_text();
    }
    return {};
}

std::optional<bool> compare_values(CompareOp op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return std::nullopt;
    const auto c = a <=> b;
    switch (op) {
        case CompareOp::Eq: return c == 0;
        case CompareOp::Ne: return c != 0;
        case CompareOp::Lt: return c < 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Ge: return c >= 0;
    }
    return std::nullopt;
}

std::optional<bool> like_match(const Value& text, const Value& pattern) {
    if (text.is_null() || pattern.is_null()) return std::nullopt;
    const std::string s = text.to_display();
    const std::string p = pattern.to_display();
    // dp[j]: pattern prefix of length j matches the current text prefix.
    std::vector<char> dp(p.size() + 1, 0), next(p.size() + 1, 0);
    dp[0] = 1;
    for (std::size_t j = 1; j <= p.size() && p[j - 1] == '%'; ++j) dp[j] = 1;
    for (char c : s) {
        std::fill(next.begin(), next.end(), 0);
        for (std::size_t j = 1; j <= p.size(); ++j) {
            const char pc = p[j - 1];
            if (pc == '%') {
                next[j] = next[j - 1] || dp[j];
            } else if (pc == '_' || pc == c) {
                next[j] = dp[j - 1];
            }
        }
        dp.swap(next);
    }
    return dp[p.size()] != 0;
}

std::optional<bool> tri_and(std::optional<bool> a, std::optional<bool> b) {
    if (a == false || b == false) return false;
    if (!a || !b) return std::nullopt;
    return true;
}

std::optional<bool> tri_or(std::optional<bool> a, std::optional<bool> b) {
    if (a == true || b == true) return true;
    if (!a || !b) return std::nullopt;
    return false;
}

std::optional<bool> tri_not(std::optional<bool> a) {
    if (!a) return std::nullopt;
    return !*a;
}

}  // namespace relkg
