#ifndef REDLENS_H
#define REDLENS_H

#include <stddef.h>
#include <stdint.h>

// Group-average linkage.
#define RL_LINKAGE_AVERAGE 0

// Single linkage (maximum pairwise similarity).
#define RL_LINKAGE_SINGLE 1

// Complete linkage (minimum pairwise similarity).
#define RL_LINKAGE_COMPLETE 2

typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_ARGUMENT = 2,
  RL_STATUS_SHAPE = 3,
  RL_STATUS_NON_FINITE = 4,
  RL_STATUS_ZERO_COLUMNS = 5,
  RL_STATUS_IO = 6,
  RL_STATUS_ARCHIVE = 7,
  RL_STATUS_OUT_OF_RANGE = 8,
  RL_STATUS_PANIC = 9,
} RlStatus;

// A weight archive loaded from disk.
typedef struct RlArchive RlArchive;

// A clustering of feature columns.
typedef struct RlPartition RlPartition;

// Redundancy of one layer at one threshold.
typedef struct RlReport {
  // Number of features.
  size_t n_prime;
  // Number of clusters.
  size_t n_f;
  // `n_prime - n_f`.
  size_t n_r;
  double percent_redundant;
} RlReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rl_version(void);

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *rl_last_error_message(void);

// Redundancy of the feature columns of a `rows x cols` matrix at
// threshold `tau`.
enum RlStatus rl_layer_redundancy(const double *data,
                                  size_t rows,
                                  size_t cols,
                                  double tau,
                                  uint32_t linkage,
                                  struct RlReport *out);

// Clusters the feature columns. On success `*out` owns a new partition.
enum RlStatus rl_cluster(const double *data,
                         size_t rows,
                         size_t cols,
                         double tau,
                         uint32_t linkage,
                         struct RlPartition **out);

// Number of clustered features, or 0 for NULL.
size_t rl_partition_n_items(const struct RlPartition *p);

// Number of clusters, or 0 for NULL.
size_t rl_partition_n_clusters(const struct RlPartition *p);

// Copies the cluster index of every feature into `labels`, which must hold
// `len >= rl_partition_n_items(p)` entries. Clusters are numbered by their
// smallest member.
enum RlStatus rl_partition_labels(const struct RlPartition *p, size_t *labels, size_t len);

void rl_partition_free(struct RlPartition *p);

// Loads a weight archive directory. On success `*out` owns the archive.
enum RlStatus rl_archive_open(const char *path, struct RlArchive **out);

// Number of layers, or 0 for NULL.
size_t rl_archive_layer_count(const struct RlArchive *a);

// Name of layer `index`, owned by the archive; NULL if out of range.
const char *rl_archive_layer_name(const struct RlArchive *a, size_t index);

// Redundancy of layer `index` at threshold `tau`. Convolution layers are
// unrolled to one column per filter.
enum RlStatus rl_archive_analyze(const struct RlArchive *a,
                                 size_t index,
                                 double tau,
                                 uint32_t linkage,
                                 struct RlReport *out);

void rl_archive_free(struct RlArchive *a);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REDLENS_H */
