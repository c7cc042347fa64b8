#include "oneshot/numformat.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace oneshot {

std::string format_fixed4(double value) {
    const bool negative = std::signbit(value) && value != 0.0;
    const double scaled = std::abs(value) * 10000.0;
    const double whole = std::floor(scaled);
    const double frac = scaled - whole;

    long long units;
    if (std::abs(frac - 0.5) < 1e-7) {
        // half-even: 0.96435 -> 0.9644, 0.96445 -> 0.9644
        const auto w = static_cast<long long>(whole);
        units = (w % 2 == 0) ? w : w + 1;
    } else {
        units = static_cast<long long>(std::floor(scaled + 0.5));
    }

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", negative ? "-" : "", units / 10000,
                  units % 10000);
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace oneshot
