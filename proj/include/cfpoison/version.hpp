#ifndef CFPOISON_VERSION_HPP_
#define CFPOISON_VERSION_HPP_

namespace cfpoison {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cfpoison

#endif  // CFPOISON_VERSION_HPP_
