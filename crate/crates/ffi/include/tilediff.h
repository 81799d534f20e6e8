#ifndef TILEDIFF_H
#define TILEDIFF_H

/* Generated by cbindgen. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_INPUT = 2,
  TD_STATUS_NUMERICAL = 3,
  TD_STATUS_IO = 4,
  TD_STATUS_PANIC = 5,
} TdStatus;

typedef struct TdDataset TdDataset;

typedef struct TdModel TdModel;

typedef struct TdTileSet TdTileSet;

/**
 * Fit settings; see [`td_fit_options_default`].
 */
typedef struct TdFitOptions {
  double tolerance;
  size_t max_sweeps;
} TdFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer is
 * valid until the next `td_*` call on the same thread.
 */
const char *td_last_error(void);

struct TdFitOptions td_fit_options_default(void);

/**
 * Reads a dataset file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TdStatus td_dataset_read(const char *path, struct TdDataset **out);

/**
 * Builds a dataset from `rows * cols` row-major bytes (nonzero means one).
 *
 * # Safety
 * `cells` must point to `rows * cols` readable bytes.
 */
enum TdStatus td_dataset_from_dense(size_t rows,
                                    size_t cols,
                                    const uint8_t *cells,
                                    struct TdDataset **out);

/**
 * # Safety
 * `data` must be a live dataset handle; `rows` and `cols` valid pointers.
 */
enum TdStatus td_dataset_dims(const struct TdDataset *data, size_t *rows, size_t *cols);

/**
 * # Safety
 * `data` must be NULL or a handle not freed before.
 */
void td_dataset_free(struct TdDataset *data);

/**
 * Empty tile set over a `rows x cols` dataset.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum TdStatus td_tileset_new(size_t rows, size_t cols, struct TdTileSet **out);

/**
 * Reads a tile-set file; tiles without a frequency are annotated from `data`.
 *
 * # Safety
 * `path` must be a NUL-terminated string, `data` a live handle.
 */
enum TdStatus td_tileset_read(const char *path,
                              const struct TdDataset *data,
                              struct TdTileSet **out);

/**
 * Background preset (`none`, `density`, `columns`, `rows`, `columns+rows`)
 * computed from `data`.
 *
 * # Safety
 * `preset` must be a NUL-terminated string, `data` a live handle.
 */
enum TdStatus td_tileset_background(const struct TdDataset *data,
                                    const char *preset,
                                    struct TdTileSet **out);

/**
 * Appends the tile `row_ids x col_ids` with frequency `freq`.
 *
 * # Safety
 * The id arrays must hold `n_rows` and `n_cols` readable elements.
 */
enum TdStatus td_tileset_push(struct TdTileSet *set,
                              const size_t *row_ids,
                              size_t n_rows,
                              const size_t *col_ids,
                              size_t n_cols,
                              double freq);

/**
 * Number of tiles, or 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t td_tileset_len(const struct TdTileSet *set);

/**
 * # Safety
 * `set` must be NULL or a handle not freed before.
 */
void td_tileset_free(struct TdTileSet *set);

/**
 * Maximum-entropy model of `set`. `opts` may be NULL for defaults.
 *
 * # Safety
 * `set` must be a live handle, `out` a valid pointer.
 */
enum TdStatus td_fit(const struct TdTileSet *set,
                     const struct TdFitOptions *opts,
                     struct TdModel **out);

/**
 * `P[(row, col) = 1]` under the model, 1-based.
 *
 * # Safety
 * `model` must be a live handle, `out` a valid pointer.
 */
enum TdStatus td_model_probability(const struct TdModel *model,
                                   size_t row,
                                   size_t col,
                                   double *out);

/**
 * Entropy in nats.
 *
 * # Safety
 * `model` must be a live handle, `out` a valid pointer.
 */
enum TdStatus td_model_entropy(const struct TdModel *model, double *out);

/**
 * # Safety
 * `model` must be NULL or a handle not freed before.
 */
void td_model_free(struct TdModel *model);

/**
 * Normalized distance between `left` and `right` given `background`: at most
 * 1 when every tile is exact, at most 2 otherwise.
 *
 * # Safety
 * All handles must be live; `opts` may be NULL; `out` a valid pointer.
 */
enum TdStatus td_distance(const struct TdTileSet *left,
                          const struct TdTileSet *right,
                          const struct TdTileSet *background,
                          const struct TdFitOptions *opts,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TILEDIFF_H */
