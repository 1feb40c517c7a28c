#include "rotseq/rotseq.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "rotseq/blocksched.hpp"
#include "rotseq/error.hpp"
#include "rotseq/matrix.hpp"
#include "rotseq/microkernel.hpp"
#include "rotseq/perfmodel.hpp"
#include "rotseq/rotcore.hpp"
#include "rotseq/sequence.hpp"
#include "rotseq/verify.hpp"

struct rotseq_matrix {
  rotseq::DenseMatrix m;
};

struct rotseq_sequence {
  rotseq::RotationSequence s;
};

struct rotseq_packed {
  rotseq::PackedPanels p;
  std::size_t rows;
};

namespace {

thread_local std::string g_last_error;

rotseq_status fail(rotseq_status code, const char* what) {
  g_last_error = what;
  return code;
}

template <class F>
rotseq_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return ROTSEQ_OK;
  } catch (const rotseq::UsageError& e) {
    return fail(ROTSEQ_E_USAGE, e.what());
  } catch (const rotseq::PlanningError& e) {
    return fail(ROTSEQ_E_PLANNING, e.what());
  } catch (const rotseq::ModelError& e) {
    return fail(ROTSEQ_E_MODEL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ROTSEQ_E_ALLOC, "out of memory");
  } catch (const std::exception& e) {
    return fail(ROTSEQ_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ROTSEQ_E_INTERNAL, "unknown error");
  }
}

template <class T>
void require(const T* p, const char* name) {
  if (!p) throw rotseq::UsageError(std::string(name) + " must not be NULL");
}

rotseq::TransformKind to_kind(rotseq_kind k) {
  switch (k) {
    case ROTSEQ_ROTATION: return rotseq::TransformKind::Rotation;
    case ROTSEQ_REFLECTOR: return rotseq::TransformKind::Reflector;
  }
  throw rotseq::UsageError("unknown transform kind");
}

rotseq::Arith to_arith(rotseq_arith a) {
  switch (a) {
    case ROTSEQ_STRICT: return rotseq::Arith::Strict;
    case ROTSEQ_FAST: return rotseq::Arith::Fast;
  }
  throw rotseq::UsageError("unknown arithmetic mode");
}

rotseq::CacheSpec to_cache(const rotseq_cache& c) {
  rotseq::CacheSpec out;
  out.T1 = c.T1, out.T2 = c.T2, out.T3 = c.T3, out.S = c.S;
  return out;
}

rotseq::KernelShape to_shape(const rotseq_shape& s, rotseq_arith arith) {
  rotseq::KernelShape out;
  out.m_r = s.m_r, out.k_r = s.k_r, out.mode = to_arith(arith);
  return out;
}

rotseq::BlockPlan to_plan(const rotseq_plan& p, std::size_t cap) {
  rotseq::BlockPlan out;
  out.n_b = p.n_b, out.k_b = p.k_b, out.m_b = p.m_b, out.m_b_cap = cap;
  return out;
}

void fill_plan(rotseq_plan& dst, const rotseq::BlockPlan& src) {
  dst.n_b = src.n_b, dst.k_b = src.k_b, dst.m_b = src.m_b;
  dst.raw_n_b = src.raw.n_b, dst.raw_k_b = src.raw.k_b, dst.raw_m_b = src.raw.m_b;
}

void fill_memops(rotseq_memops* out, const rotseq::MemOpReport& r) {
  if (!out) return;
  out->loads = r.loads, out->stores = r.stores, out->total = r.total, out->factor = r.factor;
}

void resolve(rotseq_options& o) {
  if (o.plan.n_b && o.plan.k_b && o.plan.m_b) return;
  const auto chosen = rotseq::choose_block_sizes(to_cache(o.cache), to_shape(o.shape, o.arith),
                                                 o.cache.m_b_cap);
  if (!o.plan.n_b) o.plan.n_b = chosen.n_b;
  if (!o.plan.k_b) o.plan.k_b = chosen.k_b;
  if (!o.plan.m_b) o.plan.m_b = chosen.m_b;
  o.plan.raw_n_b = chosen.raw.n_b, o.plan.raw_k_b = chosen.raw.k_b;
  o.plan.raw_m_b = chosen.raw.m_b;
}

}  // namespace

extern "C" {

const char* rotseq_last_error(void) { return g_last_error.c_str(); }

const char* rotseq_status_name(rotseq_status status) {
  switch (status) {
    case ROTSEQ_OK: return "ok";
    case ROTSEQ_E_USAGE: return "usage error";
    case ROTSEQ_E_PLANNING: return "planning error";
    case ROTSEQ_E_MODEL: return "model error";
    case ROTSEQ_E_ALLOC: return "allocation failure";
    case ROTSEQ_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rotseq_algo_name(rotseq_algo algo) {
  switch (algo) {
    case ROTSEQ_NAIVE: return "naive";
    case ROTSEQ_WAVEFRONT: return "wavefront";
    case ROTSEQ_BLOCKED: return "blocked";
    case ROTSEQ_FUSED: return "fused";
    case ROTSEQ_KERNEL: return "kernel";
    case ROTSEQ_KERNEL_PREPACKED: return "kernel-prepacked";
  }
  return "?";
}

rotseq_status rotseq_algo_from_name(const char* name, rotseq_algo* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<rotseq_algo>(rotseq::parse_variant(name));
  });
}

rotseq_status rotseq_matrix_create(size_t rows, size_t cols, rotseq_matrix** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rotseq_matrix{rotseq::DenseMatrix(rows, cols)};
  });
}

rotseq_status rotseq_matrix_random(size_t rows, size_t cols, uint64_t seed, rotseq_matrix** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rotseq_matrix{rotseq::DenseMatrix::random(rows, cols, seed)};
  });
}

rotseq_status rotseq_matrix_copy(const rotseq_matrix* src, rotseq_matrix** out) {
  return guarded([&] {
    require(src, "src");
    require(out, "out");
    *out = new rotseq_matrix{src->m};
  });
}

void rotseq_matrix_destroy(rotseq_matrix* m) { delete m; }
size_t rotseq_matrix_rows(const rotseq_matrix* m) { return m ? m->m.rows() : 0; }
size_t rotseq_matrix_cols(const rotseq_matrix* m) { return m ? m->m.cols() : 0; }
double* rotseq_matrix_data(rotseq_matrix* m) { return m ? m->m.data() : nullptr; }

rotseq_status rotseq_sequence_generate(size_t n, size_t k, uint64_t seed, rotseq_sequence** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rotseq_sequence{rotseq::generate_sequence(n, k, seed)};
  });
}

rotseq_status rotseq_sequence_create(size_t n, size_t k, const double* c, const double* s,
                                     rotseq_sequence** out) {
  return guarded([&] {
    require(out, "out");
    if (n < 2) throw rotseq::UsageError("a sequence needs n >= 2");
    const std::size_t count = (n - 1) * k;
    if (count) {
      require(c, "c");
      require(s, "s");
    }
    std::vector<double> cv(c, c + count), sv(s, s + count);
    *out = new rotseq_sequence{rotseq::RotationSequence(n, k, std::move(cv), std::move(sv))};
  });
}

void rotseq_sequence_destroy(rotseq_sequence* seq) { delete seq; }
size_t rotseq_sequence_n(const rotseq_sequence* seq) { return seq ? seq->s.n() : 0; }
size_t rotseq_sequence_k(const rotseq_sequence* seq) { return seq ? seq->s.k() : 0; }

void rotseq_cache_defaults(rotseq_cache* cache) {
  if (!cache) return;
  const rotseq::CacheSpec d;
  cache->T1 = d.T1, cache->T2 = d.T2, cache->T3 = d.T3, cache->S = d.S;
  cache->m_b_cap = rotseq::kDefaultRowBlockCap;
}

rotseq_status rotseq_config_load(const char* path, rotseq_cache* cache, size_t* threads) {
  return guarded([&] {
    require(path, "path");
    require(cache, "cache");
    rotseq::BenchConfig base;
    base.cache = to_cache(*cache);
    base.m_b_cap = cache->m_b_cap;
    if (threads) base.threads = *threads;
    const auto cfg = rotseq::load_config(path, base);
    cache->T1 = cfg.cache.T1, cache->T2 = cfg.cache.T2, cache->T3 = cfg.cache.T3;
    cache->S = cfg.cache.S, cache->m_b_cap = cfg.m_b_cap;
    if (threads) *threads = cfg.threads;
  });
}

rotseq_status rotseq_plan_choose(const rotseq_cache* cache, rotseq_shape shape, rotseq_plan* out) {
  return guarded([&] {
    require(cache, "cache");
    require(out, "out");
    fill_plan(*out, rotseq::choose_block_sizes(to_cache(*cache), to_shape(shape, ROTSEQ_STRICT),
                                               cache->m_b_cap));
  });
}

size_t rotseq_l1_wave_bound(size_t T1, size_t m_r, size_t k_r) {
  return rotseq::l1_wave_bound(T1, m_r, k_r);
}
size_t rotseq_l2_chunk_bound(size_t T2, size_t m_r, size_t n_b) {
  return rotseq::l2_chunk_bound(T2, m_r, n_b);
}
size_t rotseq_l3_row_bound(size_t T3, size_t n_b, size_t k_b) {
  return n_b + k_b == 0 ? 0 : rotseq::l3_row_bound(T3, n_b, k_b);
}

void rotseq_options_defaults(rotseq_options* opts) {
  if (!opts) return;
  std::memset(opts, 0, sizeof(*opts));
  opts->algo = ROTSEQ_KERNEL;
  opts->kind = ROTSEQ_ROTATION;
  opts->arith = ROTSEQ_STRICT;
  opts->shape = {16, 2};
  rotseq_cache_defaults(&opts->cache);
  opts->fused_n_r = 2;
  opts->fused_k_r = 2;
  opts->threads = 1;
}

rotseq_status rotseq_options_resolve(rotseq_options* opts) {
  return guarded([&] {
    require(opts, "opts");
    resolve(*opts);
  });
}

rotseq_status rotseq_apply(rotseq_matrix* a, const rotseq_sequence* seq,
                           const rotseq_options* opts) {
  return guarded([&] {
    require(a, "a");
    require(seq, "seq");
    require(opts, "opts");
    rotseq_options o = *opts;
    const auto kind = to_kind(o.kind);
    const auto arith = to_arith(o.arith);
    const rotseq::MatrixView view = a->m.view();
    switch (o.algo) {
      case ROTSEQ_NAIVE:
        rotseq::apply_naive(view, seq->s, kind, arith);
        break;
      case ROTSEQ_WAVEFRONT:
        rotseq::apply_wavefront(view, seq->s, kind, arith);
        break;
      case ROTSEQ_FUSED:
        rotseq::apply_fused(view, seq->s, o.fused_n_r, o.fused_k_r, kind, arith);
        break;
      case ROTSEQ_BLOCKED:
        resolve(o);
        rotseq::apply_block_sweep(view, seq->s, to_plan(o.plan, o.cache.m_b_cap), kind, arith);
        break;
      case ROTSEQ_KERNEL:
      case ROTSEQ_KERNEL_PREPACKED: {
        resolve(o);
        const auto shape = to_shape(o.shape, o.arith);
        const auto plan = to_plan(o.plan, o.cache.m_b_cap);
        if (o.algo == ROTSEQ_KERNEL) {
          rotseq::apply_blocked(view, seq->s, plan, shape, kind, o.threads);
        } else {
          auto packed = rotseq::pack_row_block(view, 0, view.rows, shape.m_r);
          rotseq::apply_blocked_packed(packed, seq->s, plan, shape, kind, o.threads);
          rotseq::unpack_row_block(packed, view, 0);
        }
        break;
      }
      default:
        throw rotseq::UsageError("unknown algorithm id " + std::to_string(o.algo));
    }
  });
}

rotseq_status rotseq_pack(const rotseq_matrix* a, size_t m_r, rotseq_packed** out) {
  return guarded([&] {
    require(a, "a");
    require(out, "out");
    auto packed = rotseq::pack_row_block(a->m.view(), 0, a->m.rows(), m_r);
    *out = new rotseq_packed{std::move(packed), a->m.rows()};
  });
}

rotseq_status rotseq_unpack(const rotseq_packed* p, rotseq_matrix* a) {
  return guarded([&] {
    require(p, "p");
    require(a, "a");
    rotseq::unpack_row_block(p->p, a->m.view(), 0);
  });
}

void rotseq_packed_destroy(rotseq_packed* p) { delete p; }

rotseq_status rotseq_apply_packed(rotseq_packed* p, const rotseq_sequence* seq,
                                  const rotseq_options* opts) {
  return guarded([&] {
    require(p, "p");
    require(seq, "seq");
    require(opts, "opts");
    rotseq_options o = *opts;
    resolve(o);
    rotseq::apply_blocked_packed(p->p, seq->s, to_plan(o.plan, o.cache.m_b_cap),
                                 to_shape(o.shape, o.arith), to_kind(o.kind), o.threads);
  });
}

rotseq_status rotseq_oracle_apply(const rotseq_matrix* a, const rotseq_sequence* seq,
                                  rotseq_kind kind, rotseq_matrix** out) {
  return guarded([&] {
    require(a, "a");
    require(seq, "seq");
    require(out, "out");
    const auto q = rotseq::accumulate_Q(seq->s, to_kind(kind));
    *out = new rotseq_matrix{rotseq::reference_multiply(a->m, q)};
  });
}

rotseq_status rotseq_compare(const rotseq_matrix* x, const rotseq_matrix* y, int strict, size_t k,
                             rotseq_comparison* out) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(out, "out");
    const auto r = rotseq::compare(x->m, y->m);
    out->max_abs_diff = r.max_abs_diff;
    out->max_rel_diff = r.max_rel_diff;
    out->frobenius_rel_diff = r.frobenius_rel_diff;
    out->bitwise_equal = r.bitwise_equal ? 1 : 0;
    out->passed =
        rotseq::passes(r, strict ? rotseq::TolProfile::Strict : rotseq::TolProfile::Fast, k);
  });
}

rotseq_status rotseq_memops_basic(size_t m_b, size_t n_b, size_t k_b, rotseq_memops* out) {
  return guarded([&] {
    require(out, "out");
    fill_memops(out, rotseq::memops_basic(m_b, n_b, k_b));
  });
}

rotseq_status rotseq_memops_fused(size_t n_r, size_t k_r, size_t m_b, size_t n_b, size_t k_b,
                                  rotseq_memops* out) {
  return guarded([&] {
    require(out, "out");
    fill_memops(out, rotseq::memops_fused(n_r, k_r, m_b, n_b, k_b));
  });
}

rotseq_status rotseq_memops_kernel(size_t k_r, size_t m_r, size_t m_b, size_t n_b, size_t k_b,
                                   rotseq_memops* out) {
  return guarded([&] {
    require(out, "out");
    fill_memops(out, rotseq::memops_kernel(k_r, m_r, m_b, n_b, k_b));
  });
}

rotseq_status rotseq_io_models(double m, double n, double k, double S, double m_b, double k_b,
                               rotseq_io* out) {
  return guarded([&] {
    require(out, "out");
    const auto r = rotseq::io_models(m, n, k, S, m_b, k_b);
    out->lower_bound = r.lower_bound;
    out->wavefront_io = r.wavefront_io;
    out->op_intensity_bound = r.op_intensity_bound;
    out->op_intensity_wavefront = r.op_intensity_wavefront;
    out->flops = r.flops;
  });
}

rotseq_status rotseq_instrumented_block(rotseq_formula formula, size_t m_b, size_t n_b,
                                        size_t k_b, rotseq_shape shape, rotseq_memops* measured,
                                        rotseq_memops* model) {
  return guarded([&] {
    rotseq::Formula f;
    switch (formula) {
      case ROTSEQ_MODEL_BASIC: f = rotseq::Formula::Basic; break;
      case ROTSEQ_MODEL_FUSED: f = rotseq::Formula::Fused; break;
      case ROTSEQ_MODEL_KERNEL: f = rotseq::Formula::Kernel; break;
      default: throw rotseq::UsageError("unknown formula id");
    }
    const auto r = rotseq::instrumented_block(f, m_b, n_b, k_b, to_shape(shape, ROTSEQ_STRICT));
    fill_memops(measured, r.measured);
    fill_memops(model, r.model);
  });
}

double rotseq_exact_flops(size_t m, size_t n, size_t k) { return rotseq::exact_flops(m, n, k); }

void rotseq_testing_inject_fault(int on) { rotseq::testing::inject_kernel_fault(on != 0); }

}  // extern "C"
