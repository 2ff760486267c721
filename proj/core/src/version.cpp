#include "kgan/version.hpp"

namespace kgan {

const char* version() noexcept { return KGAN_VERSION_STRING; }

}  // namespace kgan
