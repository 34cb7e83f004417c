#include "dynalay/rng.hpp"

#include <cstdio>
#include <sstream>

namespace dynalay {

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string Rng::state_digest() const {
    std::ostringstream os;
    os << engine_;
    return fnv1a_hex(os.str());
}

} // namespace dynalay
