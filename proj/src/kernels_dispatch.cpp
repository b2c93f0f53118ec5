#include <cstdlib>
#include <cstring>

#include "genlab/kernels.hpp"

namespace genlab::kernels {

// Defined in kernels_avx2.cpp; nullptr when the backend was not compiled in.
const Ops* avx2_ops_compiled();

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Ops* select_ops() {
  const Ops* avx2 = avx2_ops();
  const char* env = std::getenv("GENLAB_KERNELS");
  if (env != nullptr) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2 != nullptr) return avx2;
  }
  return avx2 != nullptr ? avx2 : &scalar_ops();
}

const Ops* forced = nullptr;

}  // namespace

const Ops* avx2_ops() {
  static const Ops* ops =
      cpu_has_avx2() ? avx2_ops_compiled() : nullptr;
  return ops;
}

const Ops& active_ops() {
  if (forced != nullptr) return *forced;
  static const Ops* ops = select_ops();
  return *ops;
}

void force_ops(const Ops* ops) { forced = ops; }

}  // namespace genlab::kernels
