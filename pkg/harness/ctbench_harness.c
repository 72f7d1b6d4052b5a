/* Runtime for the generated benchmark cases.
 *
 * All platform-specific pieces (cycle counter, line flush, fences,
 * affinity) are in this file. On x86-64 the counter is rdtsc serialized
 * on both sides and the flush is clflush; other architectures fall back
 * to clock_gettime for timing and report no flush capability, which
 * makes every case exit CTB_EXIT_SKIP_CAPABILITY rather than measure
 * something the harness cannot control.
 */
#define _GNU_SOURCE

#include "ctbench_harness.h"

#include <sched.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/mman.h>
#include <time.h>
#include <unistd.h>

#if defined(__x86_64__) || defined(__i386__)
#include <cpuid.h>
#include <x86intrin.h>
#define CTB_X86 1
#else
#define CTB_X86 0
#endif

/* ------------------------------------------------------------------ */
/* fences and cycle counter                                            */
/* ------------------------------------------------------------------ */

static inline void ctb_fence(void)
{
#if CTB_X86
    __asm__ __volatile__("mfence; lfence" ::: "memory");
#else
    __atomic_thread_fence(__ATOMIC_SEQ_CST);
#endif
}

uint64_t ctb_tsc_begin(void)
{
#if CTB_X86
    /* drain the store buffer, then stop later instructions hoisting
     * above the counter read */
    __asm__ __volatile__("mfence; lfence" ::: "memory");
    return __rdtsc();
#else
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (uint64_t)ts.tv_sec * 1000000000u + (uint64_t)ts.tv_nsec;
#endif
}

uint64_t ctb_tsc_end(void)
{
#if CTB_X86
    unsigned int aux;
    /* rdtscp waits for earlier loads; the trailing lfence stops later
     * work from starting before the read retires */
    uint64_t t = __rdtscp(&aux);
    __asm__ __volatile__("lfence" ::: "memory");
    return t;
#else
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (uint64_t)ts.tv_sec * 1000000000u + (uint64_t)ts.tv_nsec;
#endif
}

int ctb_have_clflush(void)
{
#if CTB_X86
    unsigned int eax = 0, ebx = 0, ecx = 0, edx = 0;
    if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx))
        return 0;
    return (edx >> 19) & 1u;
#else
    return 0;
#endif
}

static inline void ctb_line_flush(volatile uint8_t *p)
{
#if CTB_X86
    __asm__ __volatile__("clflush (%0)" ::"r"((const void *)p) : "memory");
#else
    (void)p;
#endif
}

/* ------------------------------------------------------------------ */
/* tracked-memory layout                                               */
/* ------------------------------------------------------------------ */

/* Geometry, in bytes. Blocks sit 65 lines apart so each block's lines
 * land in a different set; the alias copy sits 1 MiB above its target,
 * which keeps the set index bits equal for every power-of-two set count
 * up to 16384 while changing the tag. */
#define CTB_LINE 64
#define CTB_BLOCK_STRIDE (65 * CTB_LINE)
#define CTB_ALIAS_OFFSET (1u << 20)
#define CTB_D_OFFSET CTB_LINE
#define CTB_NIB_OFFSET (2 * CTB_LINE)
#define CTB_ARENA_SIZE (CTB_ALIAS_OFFSET + CTB_BLOCKS * CTB_BLOCK_STRIDE)

struct ctb_layout {
    uint8_t *arena; /* MAP_SHARED so fork'd actors touch the same lines */
    volatile uint8_t *a[CTB_BLOCKS];
    volatile uint8_t *alias[CTB_BLOCKS];
    volatile uint8_t *d[CTB_BLOCKS];
    volatile uint8_t *nib[CTB_BLOCKS];
};

ctb_layout_t *ctb_layout_create(void)
{
    ctb_layout_t *layout = calloc(1, sizeof(*layout));
    if (layout == NULL)
        return NULL;
    layout->arena = mmap(NULL, CTB_ARENA_SIZE, PROT_READ | PROT_WRITE,
                         MAP_SHARED | MAP_ANONYMOUS, -1, 0);
    if (layout->arena == MAP_FAILED) {
        free(layout);
        return NULL;
    }
    /* fault every page in before timing starts */
    memset(layout->arena, 0x5a, CTB_ARENA_SIZE);
    for (int b = 0; b < CTB_BLOCKS; b++) {
        uint8_t *base = layout->arena + (size_t)b * CTB_BLOCK_STRIDE;
        layout->a[b] = base;
        layout->d[b] = base + CTB_D_OFFSET;
        layout->nib[b] = base + CTB_NIB_OFFSET;
        layout->alias[b] = base + CTB_ALIAS_OFFSET;
    }
    return layout;
}

void ctb_layout_destroy(ctb_layout_t *layout)
{
    if (layout == NULL)
        return;
    munmap(layout->arena, CTB_ARENA_SIZE);
    free(layout);
}

volatile uint8_t *const *ctb_role(ctb_layout_t *layout, const char *role)
{
    if (strcmp(role, "a") == 0)
        return layout->a;
    if (strcmp(role, "alias") == 0)
        return layout->alias;
    if (strcmp(role, "d") == 0)
        return layout->d;
    if (strcmp(role, "nib") == 0)
        return layout->nib;
    return NULL;
}

void ctb_flush_tracked(ctb_layout_t *layout)
{
    for (int b = 0; b < CTB_BLOCKS; b++) {
        ctb_line_flush(layout->a[b]);
        ctb_line_flush(layout->alias[b]);
        ctb_line_flush(layout->d[b]);
        ctb_line_flush(layout->nib[b]);
    }
    ctb_fence();
}

/* ------------------------------------------------------------------ */
/* operations                                                          */
/* ------------------------------------------------------------------ */

/* load sink; volatile so the reads cannot be elided */
static volatile uint8_t ctb_sink;
static volatile uint8_t ctb_dummy_cell;
static uint8_t ctb_write_seed;

static inline void ctb_do_op(int kind, volatile uint8_t *const *addrs)
{
    switch (kind) {
    case CTB_OP_READ: {
        uint8_t acc = 0;
        for (int b = 0; b < CTB_BLOCKS; b++)
            acc ^= addrs[b][0];
        ctb_sink = acc;
        break;
    }
    case CTB_OP_WRITE: {
        uint8_t v = ++ctb_write_seed;
        for (int b = 0; b < CTB_BLOCKS; b++)
            addrs[b][0] = v;
        break;
    }
    case CTB_OP_FLUSH:
        for (int b = 0; b < CTB_BLOCKS; b++)
            ctb_line_flush(addrs[b]);
        break;
    default:
        break;
    }
}

void ctb_op(int kind, volatile uint8_t *const *addrs)
{
    ctb_fence();
    ctb_do_op(kind, addrs);
    ctb_fence();
}

uint64_t ctb_timed_op(int kind, volatile uint8_t *const *addrs)
{
    uint64_t t0 = ctb_tsc_begin();
    ctb_do_op(kind, addrs);
    uint64_t t1 = ctb_tsc_end();
    return t1 - t0;
}

void ctb_dummy_op(void)
{
    ctb_fence();
    ctb_dummy_cell = (uint8_t)(ctb_dummy_cell + 1);
    ctb_fence();
}

/* ------------------------------------------------------------------ */
/* step sequencer                                                      */
/* ------------------------------------------------------------------ */

#define CTB_SEQ_MAX_SLOTS 16
#define CTB_SEQ_DEFAULT_TIMEOUT_MS 10000
#define CTB_SEQ_SPINS_BEFORE_YIELD 1000

struct ctb_seq_shared {
    volatile long slots[CTB_SEQ_MAX_SLOTS];
#ifdef CTB_SEQ_DEBUG
    /* append-only token log for order audits in debug builds */
    volatile long log_n;
    volatile long log_slot[4096];
    volatile long log_token[4096];
#endif
};

struct ctb_seq {
    struct ctb_seq_shared *shared; /* MAP_SHARED, survives fork */
    int n_slots;
    long timeout_ms;
};

ctb_seq_t *ctb_seq_create(int n_slots)
{
    if (n_slots < 1 || n_slots > CTB_SEQ_MAX_SLOTS)
        return NULL;
    ctb_seq_t *seq = calloc(1, sizeof(*seq));
    if (seq == NULL)
        return NULL;
    seq->shared = mmap(NULL, sizeof(*seq->shared), PROT_READ | PROT_WRITE,
                       MAP_SHARED | MAP_ANONYMOUS, -1, 0);
    if (seq->shared == MAP_FAILED) {
        free(seq);
        return NULL;
    }
    seq->n_slots = n_slots;
    seq->timeout_ms = CTB_SEQ_DEFAULT_TIMEOUT_MS;
    const char *env = getenv("CTB_SEQ_TIMEOUT_MS");
    if (env != NULL && *env != '\0') {
        long v = strtol(env, NULL, 10);
        if (v > 0)
            seq->timeout_ms = v;
    }
    return seq;
}

void ctb_seq_destroy(ctb_seq_t *seq)
{
    if (seq == NULL)
        return;
    munmap(seq->shared, sizeof(*seq->shared));
    free(seq);
}

void ctb_seq_publish(ctb_seq_t *seq, int slot, long token)
{
#ifdef CTB_SEQ_DEBUG
    long i = __atomic_fetch_add(&seq->shared->log_n, 1, __ATOMIC_SEQ_CST);
    if (i < (long)(sizeof(seq->shared->log_slot) / sizeof(long))) {
        seq->shared->log_slot[i] = slot;
        seq->shared->log_token[i] = token;
    }
    /* tokens rise monotonically per slot; a violation means two actors
     * disagree about the trial schedule */
    if (seq->shared->slots[slot] >= token) {
        fprintf(stderr, "seq: slot %d token %ld published after %ld\n",
                slot, token, seq->shared->slots[slot]);
        abort();
    }
#endif
    __atomic_store_n(&seq->shared->slots[slot], token, __ATOMIC_RELEASE);
}

static long ctb_now_ms(void)
{
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return ts.tv_sec * 1000L + ts.tv_nsec / 1000000L;
}

int ctb_seq_wait(ctb_seq_t *seq, int slot, long token)
{
    long deadline = ctb_now_ms() + seq->timeout_ms;
    int spins = 0;
    /* >= rather than ==: tokens only grow, so a waiter that got
     * descheduled past its exact token must still proceed */
    while (__atomic_load_n(&seq->shared->slots[slot], __ATOMIC_ACQUIRE) < token) {
        if (++spins >= CTB_SEQ_SPINS_BEFORE_YIELD) {
            spins = 0;
            /* on hosts with fewer hardware threads than actors the
             * publisher cannot run until the waiter yields */
            sched_yield();
            if (ctb_now_ms() > deadline)
                return -1;
        }
    }
    return 0;
}

/* ------------------------------------------------------------------ */
/* pinning                                                             */
/* ------------------------------------------------------------------ */

int ctb_pin_to_hardware_thread(int thread_id)
{
    cpu_set_t set;
    CPU_ZERO(&set);
    if (thread_id < 0 || thread_id >= CPU_SETSIZE)
        return -1;
    CPU_SET(thread_id, &set);
    if (sched_setaffinity(0, sizeof(set), &set) != 0)
        return -1;
    /* verify: migrate onto the target before any timing happens */
    sched_yield();
    int cpu = sched_getcpu();
    if (cpu != thread_id)
        return -1;
    return 0;
}

/* ------------------------------------------------------------------ */
/* sample writer                                                       */
/* ------------------------------------------------------------------ */

struct ctb_writer {
    FILE *fp;
    char case_id[128];
};

ctb_writer_t *ctb_writer_open(const char *path, const char *case_id)
{
    ctb_writer_t *w = calloc(1, sizeof(*w));
    if (w == NULL)
        return NULL;
    w->fp = fopen(path, "w");
    if (w->fp == NULL) {
        free(w);
        return NULL;
    }
    snprintf(w->case_id, sizeof(w->case_id), "%s", case_id);
    return w;
}

void ctb_writer_sample(ctb_writer_t *w, const char *candidate, long trial,
                       int block, uint64_t t_first, long long t_second)
{
    fprintf(w->fp, "%s, %s, %ld, %d, %llu, %lld\n", w->case_id, candidate,
            trial, block, (unsigned long long)t_first, t_second);
    /* flush per line: a timed-out or killed trial loses nothing prior */
    fflush(w->fp);
}

void ctb_writer_close(ctb_writer_t *w)
{
    if (w == NULL)
        return;
    fclose(w->fp);
    free(w);
}
