#include <cstdlib>
#include <string_view>

#include "lpd/kernels.hpp"

namespace lpd::kernels {
namespace {

const KernelTable& select() {
    const char* env = std::getenv("LPD_SIMD");
    const std::string_view want = env ? env : "";
    if (want == "scalar") return scalar();
    if (want == "avx2") return avx2() ? *avx2() : scalar();
    if (want == "neon") return neon() ? *neon() : scalar();
    if (const KernelTable* t = avx2()) return *t;
    if (const KernelTable* t = neon()) return *t;
    return scalar();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace lpd::kernels
