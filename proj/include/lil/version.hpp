#ifndef LIL_VERSION_HPP
#define LIL_VERSION_HPP

namespace lil {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lil

#endif  // LIL_VERSION_HPP
