#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace sgda::kernels {

namespace {

const KernelTable* lookup(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &detail::kScalarTable;
    case Isa::avx2: return detail::avx2_table();
    case Isa::neon: return detail::neon_table();
  }
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("SGDA_KERNELS")) {
    const std::string name(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == isa_name(isa)) {
        if (const KernelTable* t = lookup(isa)) return t;
      }
    }
  }
  if (const KernelTable* t = detail::avx2_table()) return t;
  if (const KernelTable* t = detail::neon_table()) return t;
  return &detail::kScalarTable;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return detail::kScalarTable; }

bool isa_available(Isa isa) { return lookup(isa) != nullptr; }

const KernelTable& table(Isa isa) {
  const KernelTable* t = lookup(isa);
  if (!t) throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  return *t;
}

const KernelTable& active() { return *current().load(std::memory_order_acquire); }

void force_isa(Isa isa) { current().store(&table(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

}  // namespace sgda::kernels
