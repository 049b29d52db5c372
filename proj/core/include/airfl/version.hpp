#ifndef AIRFL_VERSION_HPP
#define AIRFL_VERSION_HPP

namespace airfl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace airfl

#endif  // AIRFL_VERSION_HPP
