#pragma once

#define CONSFD_VERSION_MAJOR 1
#define CONSFD_VERSION_MINOR 0
#define CONSFD_VERSION_PATCH 0
#define CONSFD_VERSION_STRING "1.0.0"

namespace consfd {
inline constexpr const char* version() { return CONSFD_VERSION_STRING; }
}
