#pragma once

#define GWMA_RL_VERSION_MAJOR 0
#define GWMA_RL_VERSION_MINOR 1
#define GWMA_RL_VERSION_PATCH 0
#define GWMA_RL_VERSION "0.1.0"

namespace gwma {

inline const char* version() { return GWMA_RL_VERSION; }

} // namespace gwma
