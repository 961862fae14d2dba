#pragma once

#include "sgda/kernels.hpp"

namespace sgda::kernels::detail {

extern const KernelTable kScalarTable;
// Null when the variant was not compiled for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace sgda::kernels::detail
