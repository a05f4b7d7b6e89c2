#include "swarman/format.hpp"

#include <array>
#include <charconv>

namespace swarman {

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0 so logs do not flicker between "0" and "-0"
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace swarman
