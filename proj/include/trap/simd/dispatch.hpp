#pragma once

#include <string_view>

#include "trap/simd/kernels.hpp"

namespace trap::simd {

/// True if this build contains the backend and the CPU can run it.
bool available(Backend backend);

/// Backend used by default: the environment variable TRAP_SIMD (scalar|avx2)
/// if set, otherwise the widest available one.
Backend active_backend();

const char* name(Backend backend);
Backend parse_backend(std::string_view text);

}  // namespace trap::simd
