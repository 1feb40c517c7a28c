// Built with -ffp-contract=fast (see src/CMakeLists.txt).
#include "kernels/kernel_body.inl"

namespace rotseq::kernels {

const KernelSet& fast_kernel_set(TransformKind kind) { return select_set(kind); }

}  // namespace rotseq::kernels
