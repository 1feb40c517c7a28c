/* C interface to the rotation-sequence library.
 *
 * Every fallible call returns a rotseq_status; on failure
 * rotseq_last_error() holds a message for the calling thread.
 * Matrices are column-major with leading dimension equal to the row count.
 */
#ifndef ROTSEQ_ROTSEQ_H
#define ROTSEQ_ROTSEQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(ROTSEQ_BUILDING_LIBRARY)
#define ROTSEQ_API __attribute__((visibility("default")))
#else
#define ROTSEQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ROTSEQ_OK = 0,
  ROTSEQ_E_USAGE = 1,
  ROTSEQ_E_PLANNING = 2,
  ROTSEQ_E_MODEL = 3,
  ROTSEQ_E_ALLOC = 4,
  ROTSEQ_E_INTERNAL = 5
} rotseq_status;

typedef enum { ROTSEQ_ROTATION = 0, ROTSEQ_REFLECTOR = 1 } rotseq_kind;
typedef enum { ROTSEQ_STRICT = 0, ROTSEQ_FAST = 1 } rotseq_arith;

typedef enum {
  ROTSEQ_NAIVE = 0,
  ROTSEQ_WAVEFRONT,
  ROTSEQ_BLOCKED,
  ROTSEQ_FUSED,
  ROTSEQ_KERNEL,
  ROTSEQ_KERNEL_PREPACKED
} rotseq_algo;

typedef enum { ROTSEQ_MODEL_BASIC = 0, ROTSEQ_MODEL_FUSED, ROTSEQ_MODEL_KERNEL } rotseq_formula;

typedef struct rotseq_matrix rotseq_matrix;
typedef struct rotseq_sequence rotseq_sequence;
typedef struct rotseq_packed rotseq_packed;

/* Capacities in doubles. */
typedef struct {
  size_t T1, T2, T3, S;
  size_t m_b_cap;
} rotseq_cache;

typedef struct {
  size_t m_r, k_r;
} rotseq_shape;

/* Zero n_b / k_b / m_b in an options struct means "let the planner choose". */
typedef struct {
  size_t n_b, k_b, m_b;
  size_t raw_n_b, raw_k_b, raw_m_b; /* planner bounds before rounding */
} rotseq_plan;

typedef struct {
  rotseq_algo algo;
  rotseq_kind kind;
  rotseq_arith arith;
  rotseq_shape shape;
  rotseq_plan plan;
  rotseq_cache cache;
  size_t fused_n_r, fused_k_r;
  size_t threads;
} rotseq_options;

typedef struct {
  double loads, stores, total, factor;
} rotseq_memops;

typedef struct {
  double lower_bound;
  double wavefront_io;
  double op_intensity_bound;
  double op_intensity_wavefront;
  double flops;
} rotseq_io;

typedef struct {
  double max_abs_diff;
  double max_rel_diff;
  double frobenius_rel_diff;
  int bitwise_equal;
  int passed; /* under the requested profile */
} rotseq_comparison;

ROTSEQ_API const char* rotseq_last_error(void);
ROTSEQ_API const char* rotseq_status_name(rotseq_status status);

ROTSEQ_API const char* rotseq_algo_name(rotseq_algo algo);
ROTSEQ_API rotseq_status rotseq_algo_from_name(const char* name, rotseq_algo* out);

/* Matrices */
ROTSEQ_API rotseq_status rotseq_matrix_create(size_t rows, size_t cols, rotseq_matrix** out);
/* Entries uniform in [-1, 1), deterministic in seed. */
ROTSEQ_API rotseq_status rotseq_matrix_random(size_t rows, size_t cols, uint64_t seed,
                                              rotseq_matrix** out);
ROTSEQ_API rotseq_status rotseq_matrix_copy(const rotseq_matrix* src, rotseq_matrix** out);
ROTSEQ_API void rotseq_matrix_destroy(rotseq_matrix* m);
ROTSEQ_API size_t rotseq_matrix_rows(const rotseq_matrix* m);
ROTSEQ_API size_t rotseq_matrix_cols(const rotseq_matrix* m);
ROTSEQ_API double* rotseq_matrix_data(rotseq_matrix* m);

/* Sequences: k sequences of n-1 transforms; c and s are (n-1) x k column-major. */
ROTSEQ_API rotseq_status rotseq_sequence_generate(size_t n, size_t k, uint64_t seed,
                                                  rotseq_sequence** out);
ROTSEQ_API rotseq_status rotseq_sequence_create(size_t n, size_t k, const double* c,
                                                const double* s, rotseq_sequence** out);
ROTSEQ_API void rotseq_sequence_destroy(rotseq_sequence* seq);
ROTSEQ_API size_t rotseq_sequence_n(const rotseq_sequence* seq);
ROTSEQ_API size_t rotseq_sequence_k(const rotseq_sequence* seq);

/* Planning */
ROTSEQ_API void rotseq_cache_defaults(rotseq_cache* cache);
/* Reads key=value lines over *cache; threads may be NULL. */
ROTSEQ_API rotseq_status rotseq_config_load(const char* path, rotseq_cache* cache,
                                            size_t* threads);
ROTSEQ_API rotseq_status rotseq_plan_choose(const rotseq_cache* cache, rotseq_shape shape,
                                            rotseq_plan* out);
ROTSEQ_API size_t rotseq_l1_wave_bound(size_t T1, size_t m_r, size_t k_r);
ROTSEQ_API size_t rotseq_l2_chunk_bound(size_t T2, size_t m_r, size_t n_b);
ROTSEQ_API size_t rotseq_l3_row_bound(size_t T3, size_t n_b, size_t k_b);

/* Application */
ROTSEQ_API void rotseq_options_defaults(rotseq_options* opts);
/* Fills any zero plan fields from the planner. */
ROTSEQ_API rotseq_status rotseq_options_resolve(rotseq_options* opts);
ROTSEQ_API rotseq_status rotseq_apply(rotseq_matrix* a, const rotseq_sequence* seq,
                                      const rotseq_options* opts);

/* Packed matrices for the prepacked kernel path. */
ROTSEQ_API rotseq_status rotseq_pack(const rotseq_matrix* a, size_t m_r, rotseq_packed** out);
ROTSEQ_API rotseq_status rotseq_unpack(const rotseq_packed* p, rotseq_matrix* a);
ROTSEQ_API void rotseq_packed_destroy(rotseq_packed* p);
ROTSEQ_API rotseq_status rotseq_apply_packed(rotseq_packed* p, const rotseq_sequence* seq,
                                             const rotseq_options* opts);

/* Oracles: out = A Q with Q accumulated explicitly. */
ROTSEQ_API rotseq_status rotseq_oracle_apply(const rotseq_matrix* a, const rotseq_sequence* seq,
                                             rotseq_kind kind, rotseq_matrix** out);
/* strict != 0: bitwise; otherwise the fast-arithmetic tolerance for k sequences. */
ROTSEQ_API rotseq_status rotseq_compare(const rotseq_matrix* x, const rotseq_matrix* y,
                                        int strict, size_t k, rotseq_comparison* out);

/* Models */
ROTSEQ_API rotseq_status rotseq_memops_basic(size_t m_b, size_t n_b, size_t k_b,
                                             rotseq_memops* out);
ROTSEQ_API rotseq_status rotseq_memops_fused(size_t n_r, size_t k_r, size_t m_b, size_t n_b,
                                             size_t k_b, rotseq_memops* out);
ROTSEQ_API rotseq_status rotseq_memops_kernel(size_t k_r, size_t m_r, size_t m_b, size_t n_b,
                                              size_t k_b, rotseq_memops* out);
ROTSEQ_API rotseq_status rotseq_io_models(double m, double n, double k, double S, double m_b,
                                          double k_b, rotseq_io* out);
/* Counter totals for one pipeline block next to the model's prediction. */
ROTSEQ_API rotseq_status rotseq_instrumented_block(rotseq_formula formula, size_t m_b,
                                                   size_t n_b, size_t k_b, rotseq_shape shape,
                                                   rotseq_memops* measured,
                                                   rotseq_memops* model);
ROTSEQ_API double rotseq_exact_flops(size_t m, size_t n, size_t k);

/* Test hook: when on, kernel calls perturb their output by one ulp. */
ROTSEQ_API void rotseq_testing_inject_fault(int on);

#ifdef __cplusplus
}
#endif

#endif /* ROTSEQ_ROTSEQ_H */
