#ifndef SELD_H
#define SELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SeldStatus {
  SELD_STATUS_OK = 0,
  SELD_STATUS_NULL_POINTER = 1,
  SELD_STATUS_INVALID_INPUT = 2,
  SELD_STATUS_PARSE = 3,
  SELD_STATUS_VALIDATION = 4,
  SELD_STATUS_CONFIG = 5,
  SELD_STATUS_UNSUPPORTED = 6,
  SELD_STATUS_DECODE = 7,
  SELD_STATUS_IO = 8,
  SELD_STATUS_PANIC = 9,
} SeldStatus;

/**
 * Opaque set of labeled or predicted detections.
 */
typedef struct SeldLabelSet SeldLabelSet;

/**
 * Opaque precomputed equirectangular-to-perspective sampling map.
 */
typedef struct SeldProjectionMap SeldProjectionMap;

typedef struct SeldMetricsConfig {
  double doa_threshold_deg;
  double rde_threshold;
  bool require_onscreen_match;
} SeldMetricsConfig;

typedef struct SeldMetricsReport {
  double macro_f;
  double macro_f_onoff;
  double doae_cd_deg;
  double rde_cd;
  double onscreen_accuracy;
  uint64_t matched_pairs;
} SeldMetricsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *seld_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *seld_version(void);

/**
 * Encodes `len` mono samples as a plane wave; writes `4 * len` planar
 * samples to `foa_out`.
 *
 * # Safety
 * `signal` must point to `len` doubles and `foa_out` to `4 * len` doubles.
 */
enum SeldStatus seld_encode_plane_wave(const double *signal,
                                       size_t len,
                                       double azimuth_deg,
                                       double elevation_deg,
                                       double gain,
                                       double *foa_out);

/**
 * Rotates a planar FOA buffer about the vertical axis, in place.
 *
 * # Safety
 * `foa` must point to `4 * len` doubles.
 */
enum SeldStatus seld_rotate_yaw(double *foa, size_t len, double yaw_deg);

/**
 * Mid/side stereo downmix: `L = W + Y`, `R = W - Y`.
 *
 * # Safety
 * `foa` must point to `4 * len` doubles; `left` and `right` to `len` each.
 */
enum SeldStatus seld_foa_to_stereo(const double *foa, size_t len, double *left, double *right);

/**
 * Azimuth seen from a view at `yaw_deg`, in `[-180, 180)`.
 */
double seld_rotate_azimuth(double azimuth_deg, double yaw_deg);

/**
 * Folds a rear azimuth into `[-90, 90]`.
 */
double seld_fold_front_back(double azimuth_deg);

/**
 * Onscreen test on an unfolded azimuth for a horizontal FOV.
 */
bool seld_onscreen_flag(double azimuth_deg, double hfov_deg);

struct SeldLabelSet *seld_label_set_new(void);

/**
 * Parses stereo metadata CSV text into a new label set stored in `*out`.
 *
 * # Safety
 * `csv` must be a NUL-terminated string; `out` a valid pointer.
 */
enum SeldStatus seld_label_set_from_csv(const char *csv, struct SeldLabelSet **out);

/**
 * Adds one detection. `onscreen` is -1 (unknown), 0 or 1.
 *
 * # Safety
 * `set` must be a live handle.
 */
enum SeldStatus seld_label_set_add(struct SeldLabelSet *set,
                                   uint32_t frame,
                                   uint32_t class_id,
                                   double azimuth_deg,
                                   double distance,
                                   int32_t onscreen,
                                   uint32_t track);

/**
 * Number of detections; 0 for NULL.
 *
 * # Safety
 * `set` must be NULL or a live handle.
 */
size_t seld_label_set_len(const struct SeldLabelSet *set);

/**
 * # Safety
 * `set` must be NULL or a handle not yet freed.
 */
void seld_label_set_free(struct SeldLabelSet *set);

/**
 * 20°, 1.0, no onscreen gate.
 */
struct SeldMetricsConfig seld_metrics_config_default(void);

/**
 * Scores predictions against references. `cfg` may be NULL for defaults.
 *
 * # Safety
 * `preds` and `refs` must be live handles; `cfg` NULL or valid; `out` valid.
 */
enum SeldStatus seld_score(const struct SeldLabelSet *preds,
                           const struct SeldLabelSet *refs,
                           const struct SeldMetricsConfig *cfg,
                           struct SeldMetricsReport *out);

/**
 * Builds a map for a view at `yaw_deg` and stores it in `*out`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SeldStatus seld_projection_map_new(double yaw_deg,
                                        double hfov_deg,
                                        uint32_t out_width,
                                        uint32_t out_height,
                                        uint32_t eq_width,
                                        uint32_t eq_height,
                                        struct SeldProjectionMap **out);

/**
 * Renders a perspective frame from packed 8-bit RGB panorama rows
 * (`eq_width * eq_height * 3` bytes) into `out_rgb`
 * (`out_width * out_height * 3` bytes), with bilinear sampling.
 *
 * # Safety
 * `map` must be a live handle and the buffers must have the stated sizes.
 */
enum SeldStatus seld_project_rgb(const struct SeldProjectionMap *map,
                                 const uint8_t *equirect_rgb,
                                 size_t equirect_len,
                                 uint8_t *out_rgb,
                                 size_t out_len);

/**
 * # Safety
 * `map` must be NULL or a handle not yet freed.
 */
void seld_projection_map_free(struct SeldProjectionMap *map);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELD_H */
