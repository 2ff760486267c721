#pragma once

namespace kgan {

/// Library version, "major.minor.patch".
const char* version() noexcept;

}  // namespace kgan
