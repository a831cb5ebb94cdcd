#ifndef RAMANMAG_VERSION_HPP
#define RAMANMAG_VERSION_HPP

namespace ramanmag {

inline constexpr char project_version[] = "1.0.0";

}

#endif
