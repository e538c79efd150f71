#pragma once

#include <algorithm>
#include <vector>

#include "relkg/value.hpp"

namespace relkg::detail {

enum class Agg { Count, Avg, Max, Min, Sum };

/// Fold non-null values. Inputs are sorted first so float sums do not depend
/// on enumeration order, which differs between the two executors.
inline Value fold(Agg fn, std::vector<Value> values, bool distinct, bool sum_empty_is_zero) {
    std::erase_if(values, [](const Value& v) { return v.is_null(); });
    std::sort(values.begin(), values.end());
    if (distinct) values.erase(std::unique(values.begin(), values.end()), values.end());
    switch (fn) {
        case Agg::Count: return Value::integer(static_cast<std::int64_t>(values.size()));
        case Agg::Min: return values.empty() ? Value::null() : values.front();
        case Agg::Max: return values.empty() ? Value::null() : values.back();
        case Agg::Sum:
        case Agg::Avg: {
            if (values.empty()) {
                return fn == Agg::Sum && sum_empty_is_zero ? Value::integer(0) : Value::null();
            }
            bool all_int = true;
            std::int64_t isum = 0;
            long double fsum = 0;
            for (const auto& v : values) {
                // Text sums as 0, like SQLite.
                if (v.kind() == ValueKind::Integer) {
                    isum += v.as_integer();
                    fsum += static_cast<long double>(v.as_integer());
                } else if (v.kind() == ValueKind::Float) {
                    all_int = false;
                    fsum += v.as_float();
                }
            }
            if (fn == Agg::Avg) return Value::real(static_cast<double>(fsum / static_cast<long double>(values.size())));
            return all_int ? Value::integer(isum) : Value::real(static_cast<double>(fsum));
        }
    }
    return Value::null();
}

}  // namespace relkg::detail
