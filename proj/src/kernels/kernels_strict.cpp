#include "kernels/kernel_body.inl"

namespace rotseq::kernels {

const KernelSet& strict_kernel_set(TransformKind kind) { return select_set(kind); }

namespace {

struct Tally {
  MemCounts& out;
  void a_load(std::size_t n) { out.a_loads += n; }
  void a_store(std::size_t n) { out.a_stores += n; }
  void coef_load(std::size_t n) { out.coef_loads += n; }
};

}  // namespace

void counted_wave(TransformKind kind, double* panel, std::size_t m_r, const double* c,
                  const double* s, std::size_t n_waves, std::size_t k_r, MemCounts& counts) {
  Tally t{counts};
  if (kind == TransformKind::Rotation) {
    wave_generic<TransformKind::Rotation>(panel, m_r, c, s, n_waves, k_r, t);
  } else {
    wave_generic<TransformKind::Reflector>(panel, m_r, c, s, n_waves, k_r, t);
  }
}

void counted_fused(TransformKind kind, double* const* cols, std::size_t ncols, std::size_t m,
                   const std::uint8_t* first, const double* c, const double* s,
                   std::size_t members, MemCounts& counts) {
  Tally t{counts};
  if (kind == TransformKind::Rotation) {
    fused_generic<TransformKind::Rotation>(cols, ncols, m, first, c, s, members, t);
  } else {
    fused_generic<TransformKind::Reflector>(cols, ncols, m, first, c, s, members, t);
  }
}

}  // namespace rotseq::kernels
