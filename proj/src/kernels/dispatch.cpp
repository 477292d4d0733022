#include <atomic>
#include <cstdlib>
#include <string>

#include "evotree/kernels.hpp"

namespace evotree::kernels {
namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("EVOTREE_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Backend::Scalar;
  }
  return avx2_table() != nullptr ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

Backend active_backend() { return current().load(std::memory_order_relaxed); }

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool set_backend(Backend b) {
  if (b == Backend::Avx2 && avx2_table() == nullptr) return false;
  current().store(b, std::memory_order_relaxed);
  return true;
}

const KernelTable& active() {
  if (active_backend() == Backend::Avx2) return *avx2_table();
  return scalar_table();
}

}  // namespace evotree::kernels
