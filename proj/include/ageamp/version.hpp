#ifndef AGEAMP_VERSION_HPP
#define AGEAMP_VERSION_HPP

namespace ageamp {
inline constexpr const char* kVersion = "0.1.0";
}  // namespace ageamp

#endif  // AGEAMP_VERSION_HPP
