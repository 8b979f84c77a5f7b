#pragma once

#include <charconv>
#include <ostream>

namespace wealthnet::detail {

/// Shortest round-trip decimal form.
inline void put_double(std::ostream& out, double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, ptr - buf);
}

}  // namespace wealthnet::detail
