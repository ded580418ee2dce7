#ifndef PCGBC_H
#define PCGBC_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcgStatus {
  PCG_STATUS_OK = 0,
  PCG_STATUS_NULL_ARGUMENT = 1,
  PCG_STATUS_INVALID_ARGUMENT = 2,
  PCG_STATUS_PARSE_ERROR = 3,
  PCG_STATUS_IO_ERROR = 4,
  /**
   * The GA or the policy could not produce an acceptable level.
   */
  PCG_STATUS_METHOD_FAILED = 5,
  PCG_STATUS_CORRUPT_DATA = 6,
  PCG_STATUS_PANIC = 7,
} PcgStatus;

/**
 * A distilled (state, action) dataset.
 */
typedef struct PcgDataset PcgDataset;

/**
 * A tile level.
 */
typedef struct PcgLevel PcgLevel;

/**
 * A nearest-neighbour policy ready to generate levels.
 */
typedef struct PcgPolicy PcgPolicy;

/**
 * The result of one GA run.
 */
typedef struct PcgRun PcgRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Free the result
 * with `pcgbc_string_free`.
 */
char *pcgbc_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void pcgbc_string_free(char *s);

/**
 * Parse a level in text form (`"<w> <h>\n"` then one row per line). The
 * domain is inferred from the glyphs.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcgStatus pcgbc_level_parse(const char *text, struct PcgLevel **out);

/**
 * # Safety
 * `level` must be NULL or a handle from this library, freed once.
 */
void pcgbc_level_free(struct PcgLevel *level);

/**
 * # Safety
 * `level`, `width` and `height` must be valid pointers.
 */
enum PcgStatus pcgbc_level_size(const struct PcgLevel *level, size_t *width, size_t *height);

/**
 * Text form of a level. Free with `pcgbc_string_free`.
 *
 * # Safety
 * `level` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_level_to_text(const struct PcgLevel *level, char **out);

/**
 * Domain fitness of a level.
 *
 * # Safety
 * `level` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_level_fitness(const struct PcgLevel *level, double *out);

/**
 * Number of cells that differ between two same-shape levels.
 *
 * # Safety
 * All pointers must be valid.
 */
enum PcgStatus pcgbc_level_hamming(const struct PcgLevel *a, const struct PcgLevel *b, size_t *out);

/**
 * Run the GA with the domain's default settings. `domain` is `"maze"` or
 * `"platformer"`; `size` is the maze side and is ignored for the platformer.
 *
 * # Safety
 * `domain` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcgStatus pcgbc_run_ga(const char *domain,
                            size_t size,
                            double acceptable_fraction,
                            uint64_t seed,
                            struct PcgRun **out);

/**
 * # Safety
 * `run` must be NULL or a handle from this library, freed once.
 */
void pcgbc_run_free(struct PcgRun *run);

/**
 * # Safety
 * All pointers must be valid.
 */
enum PcgStatus pcgbc_run_info(const struct PcgRun *run, size_t *generations, size_t *final_count);

/**
 * Copy of final level `i`.
 *
 * # Safety
 * `run` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_run_final_level(const struct PcgRun *run, size_t i, struct PcgLevel **out);

/**
 * Save a run directory (`initial/`, `final/`, `run.json`).
 *
 * # Safety
 * `run` must be valid and `dir` a NUL-terminated string.
 */
enum PcgStatus pcgbc_run_save(const struct PcgRun *run, const char *dir);

/**
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcgStatus pcgbc_run_load(const char *dir, struct PcgRun **out);

/**
 * Distil a run into a dataset.
 *
 * # Safety
 * `run` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_dataset_build(const struct PcgRun *run, struct PcgDataset **out);

/**
 * # Safety
 * `dataset` must be NULL or a handle from this library, freed once.
 */
void pcgbc_dataset_free(struct PcgDataset *dataset);

/**
 * Number of (state, action) pairs.
 *
 * # Safety
 * All pointers must be valid.
 */
enum PcgStatus pcgbc_dataset_len(const struct PcgDataset *dataset, size_t *out);

/**
 * # Safety
 * `dataset` must be valid and `path` a NUL-terminated string.
 */
enum PcgStatus pcgbc_dataset_save(const struct PcgDataset *dataset, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcgStatus pcgbc_dataset_load(const char *path, struct PcgDataset **out);

/**
 * Policy over `dataset` with its domain's default settings. The dataset
 * handle stays owned by the caller.
 *
 * # Safety
 * `dataset` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_policy_new(const struct PcgDataset *dataset, struct PcgPolicy **out);

/**
 * Open a `policy.json` or a bare dataset file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PcgStatus pcgbc_policy_open(const char *path, struct PcgPolicy **out);

/**
 * Override the step and restart limits.
 *
 * # Safety
 * `policy` must be a valid pointer.
 */
enum PcgStatus pcgbc_policy_set_limits(struct PcgPolicy *policy,
                                       size_t max_steps,
                                       size_t max_restarts);

/**
 * Generate one acceptable level. Returns `MethodFailed` when every restart
 * is exhausted.
 *
 * # Safety
 * `policy` and `out` must be valid pointers.
 */
enum PcgStatus pcgbc_policy_generate(const struct PcgPolicy *policy,
                                     uint64_t seed,
                                     uint64_t index,
                                     struct PcgLevel **out);

/**
 * # Safety
 * `policy` must be NULL or a handle from this library, freed once.
 */
void pcgbc_policy_free(struct PcgPolicy *policy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCGBC_H */
