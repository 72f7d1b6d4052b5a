/* Native runtime linked by every generated benchmark case.
 *
 * Timing, cache control, cross-process step sequencing, pinning, and
 * sample output live here; the generated programs hold only the
 * per-case step logic. Platform instruction names are confined to the
 * implementation file.
 *
 * Exit codes are part of the contract with the runner: a case that a
 * host cannot schedule (no SMT sibling, single core) or lacks the
 * capability for (no user-level line flush) exits with a distinct SKIP
 * code and is recorded, not failed.
 */
#ifndef CTBENCH_HARNESS_H
#define CTBENCH_HARNESS_H

#include <stdint.h>

/* each case tracks 8 independent block copies and times them as one batch */
#define CTB_BLOCKS 8

enum { CTB_OP_READ, CTB_OP_WRITE, CTB_OP_FLUSH };

enum {
    CTB_EXIT_OK = 0,
    CTB_EXIT_USAGE = 2,
    CTB_EXIT_SKIP_SCHEDULE = 64,
    CTB_EXIT_SKIP_CAPABILITY = 65,
    CTB_EXIT_SEQ_TIMEOUT = 66,
};

typedef struct ctb_layout ctb_layout_t;
typedef struct ctb_seq ctb_seq_t;
typedef struct ctb_writer ctb_writer_t;

/* Tracked-memory layout, shared across fork.
 *
 * Roles per block: "a" the target line, "alias" a line congruent with a
 * (same set index, different tag), "d" a line in a different set, "nib"
 * a line in a set unrelated to both. Congruence is computed from set
 * index bits only; physically indexed slice hashing is out of user-level
 * reach, which is exactly the approximation the case tags document.
 */
ctb_layout_t *ctb_layout_create(void);
void ctb_layout_destroy(ctb_layout_t *layout);

/* Array of CTB_BLOCKS addresses for a role name; NULL on a bad name. */
volatile uint8_t *const *ctb_role(ctb_layout_t *layout, const char *role);

/* Step sequencer: one shared token slot per step, published in pattern
 * order. A waiter proceeds once the slot reaches its token (tokens are
 * strictly increasing across trials, so late waiters never deadlock).
 * Wait returns 0, or nonzero after the timeout (CTB_SEQ_TIMEOUT_MS
 * environment override, default 10000). */
ctb_seq_t *ctb_seq_create(int n_slots);
void ctb_seq_destroy(ctb_seq_t *seq);
void ctb_seq_publish(ctb_seq_t *seq, int slot, long token);
int ctb_seq_wait(ctb_seq_t *seq, int slot, long token);

/* One operation over the 8 tracked blocks, fenced on both sides. */
void ctb_op(int kind, volatile uint8_t *const *addrs);

/* Same, returning the serialized cycle-counter delta around the batch. */
uint64_t ctb_timed_op(int kind, volatile uint8_t *const *addrs);

/* Serialized cycle counter halves, for timing loops the generated code
 * owns (whole-cache steps). */
uint64_t ctb_tsc_begin(void);
uint64_t ctb_tsc_end(void);

/* Return every tracked line to memory (trial reset). */
void ctb_flush_tracked(ctb_layout_t *layout);

/* Balance branch cost without touching tracked lines. */
void ctb_dummy_op(void);

/* Pin the calling process to one hardware thread; 0 on verified pin. */
int ctb_pin_to_hardware_thread(int thread_id);

/* Nonzero when the host exposes a user-level line flush. */
int ctb_have_clflush(void);

/* Sample output: one line per (candidate, trial), flushed per line so a
 * killed run loses at most the line being written. */
ctb_writer_t *ctb_writer_open(const char *path, const char *case_id);
void ctb_writer_sample(ctb_writer_t *w, const char *candidate, long trial,
                       int block, uint64_t t_first, long long t_second);
void ctb_writer_close(ctb_writer_t *w);

#endif /* CTBENCH_HARNESS_H */
