#ifndef CANO_H
#define CANO_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CANO_STATUS_OK = 0,
  CANO_STATUS_NULL_POINTER = 1,
  CANO_STATUS_INVALID_INPUT = 2,
  CANO_STATUS_DEGENERATE_GEOMETRY = 3,
  CANO_STATUS_NO_STABLE_POSE = 4,
  CANO_STATUS_SEMANTIC_UNAVAILABLE = 5,
  CANO_STATUS_PCA_DEGENERATE = 6,
  CANO_STATUS_IO = 7,
  CANO_STATUS_PARSE = 8,
  CANO_STATUS_UNSUPPORTED_FORMAT = 9,
  CANO_STATUS_LABEL_COUNT_MISMATCH = 10,
  CANO_STATUS_BUFFER_TOO_SMALL = 11,
  CANO_STATUS_PANIC = 12,
  CANO_STATUS_OTHER = 13,
} CanoStatus;

typedef enum {
  CANO_SYMMETRY_NONE = 0,
  CANO_SYMMETRY_DISCRETE = 1,
  CANO_SYMMETRY_CONTINUOUS = 2,
} CanoSymmetry;

typedef enum {
  CANO_TAG_HS = 0,
  CANO_TAG_HG = 1,
  CANO_TAG_HG_FLIP = 2,
  CANO_TAG_SUP_HS = 3,
  CANO_TAG_PCA_HS = 4,
} CanoTag;

typedef struct CanoCandidateSet CanoCandidateSet;

/**
 * A point cloud with optional part labels, plus the mesh it was sampled from.
 */
typedef struct CanoCloud CanoCloud;

typedef struct CanoTemplate CanoTemplate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cano_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap`). Returns the full message length in bytes excluding
 * the terminator, or 0 when no call has failed on this thread.
 */
size_t cano_last_error_message(char *buf, size_t cap);

/**
 * Builds a cloud from `n` points given as `xyz` triples. `labels` may be
 * null; otherwise it holds `n` indices into the `n_parts` strings of
 * `part_names`.
 */
CanoStatus cano_cloud_new(const double *xyz,
                          size_t n,
                          const uint32_t *labels,
                          const char *const *part_names,
                          size_t n_parts,
                          CanoCloud **out_cloud);

/**
 * Loads an OBJ or PLY file (with its `.labels` sidecar, if any). Meshes are
 * sampled to `sample_count` points with `seed` and kept for the support
 * criterion.
 */
CanoStatus cano_cloud_load(const char *path,
                           size_t sample_count,
                           uint64_t seed,
                           CanoCloud **out_cloud);

/**
 * Number of points, or 0 for a null handle.
 */
size_t cano_cloud_len(const CanoCloud *cloud);

/**
 * Copies the points as `xyz` triples into `xyz`, which holds `cap` doubles.
 */
CanoStatus cano_cloud_points(const CanoCloud *cloud, double *xyz, size_t cap);

void cano_cloud_free(CanoCloud *cloud);

/**
 * Makes a category template from a labeled cloud. `axis` (3 doubles) and
 * `angle_deg` are read only for symmetric categories.
 */
CanoStatus cano_template_new(const char *category,
                             const CanoCloud *cloud,
                             CanoSymmetry symmetry_kind,
                             const double *axis,
                             double angle_deg,
                             CanoTemplate **out_template);

void cano_template_free(CanoTemplate *tmpl);

/**
 * Symmetric squared Chamfer distance between two clouds as given.
 */
CanoStatus cano_chamfer(const CanoCloud *a, const CanoCloud *b, double *out_distance);

/**
 * Yaw aligning `object` with `template` by Chamfer distance, searched on a
 * grid of `grid_step_deg` (0 for the default) and refined. Writes the angle
 * in radians and the rotation as a `wxyz` quaternion.
 */
CanoStatus cano_horizontal_geometric(const CanoCloud *object,
                                     const CanoTemplate *tmpl,
                                     double grid_step_deg,
                                     double *out_theta,
                                     double *out_quaternion);

/**
 * The five candidate canonicalizing rotations for `object`, using default
 * settings. The loaded mesh, when there is one, drives the support
 * criterion.
 */
CanoStatus cano_candidates_generate(const CanoCloud *object,
                                    const CanoTemplate *tmpl,
                                    CanoCandidateSet **out_set);

/**
 * Number of candidates, or 0 for a null handle.
 */
size_t cano_candidates_len(const CanoCandidateSet *set);

/**
 * Tag and `wxyz` quaternion of candidate `index`.
 */
CanoStatus cano_candidates_get(const CanoCandidateSet *set,
                               size_t index,
                               CanoTag *out_tag,
                               double *out_quaternion);

void cano_candidates_free(CanoCandidateSet *set);

/**
 * Symmetry-aware angle in degrees between two poses given as `wxyz`
 * quaternions.
 */
CanoStatus cano_sym_aware_angle(const double *predicted,
                                const double *ground_truth,
                                CanoSymmetry symmetry_kind,
                                const double *axis,
                                double angle_deg,
                                double *out_degrees);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CANO_H */
