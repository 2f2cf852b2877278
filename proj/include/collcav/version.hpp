#ifndef COLLCAV_VERSION_HPP
#define COLLCAV_VERSION_HPP

namespace collcav {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace collcav

#endif
