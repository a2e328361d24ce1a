#pragma once

namespace aniso
{

inline constexpr const char *kVersion = "1.0.0";

} // namespace aniso
