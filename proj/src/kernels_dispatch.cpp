#include "dynalay/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace dynalay::kernels {

#ifdef DYNALAY_HAVE_AVX2_KERNELS
const KernelTable& avx2_table_impl() noexcept;
#endif

bool avx2_available() noexcept {
#ifdef DYNALAY_HAVE_AVX2_KERNELS
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

const KernelTable& avx2_table() {
#ifdef DYNALAY_HAVE_AVX2_KERNELS
    if (avx2_available()) return avx2_table_impl();
#endif
    throw std::runtime_error("AVX2 kernels are not available on this build/CPU");
}

namespace {

Backend startup_backend() noexcept {
    if (const char* env = std::getenv("DYNALAY_KERNELS"); env != nullptr && std::string(env) == "scalar")
        return Backend::Scalar;
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() noexcept {
    static std::atomic<Backend> slot{startup_backend()};
    return slot;
}

} // namespace

Backend active_backend() noexcept { return backend_slot().load(std::memory_order_relaxed); }

const KernelTable& active() noexcept {
#ifdef DYNALAY_HAVE_AVX2_KERNELS
    if (active_backend() == Backend::Avx2) return avx2_table_impl();
#endif
    return scalar_table();
}

void set_backend(Backend b) noexcept {
    if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
    backend_slot().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) noexcept {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

} // namespace dynalay::kernels
