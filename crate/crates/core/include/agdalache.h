/*
 * agdalache.h - C interface to interruptible futures and the EvenCounter
 * model.
 *
 * Handles are opaque tokens carried in a void*; 0 is the null handle.
 * A future is a caller-owned array of two handles: index 0 interrupts,
 * index 1 yields the result. Release both, either with al_handle_free or,
 * for index 0, with al_future_try_put_interrupt (which always consumes
 * the handle it is given).
 *
 * Every function may be called from any thread. al_init and al_exit must
 * be serialized by the caller.
 */
#ifndef AGDALACHE_H
#define AGDALACHE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Stable across versions. */
#define AL_OK               0   /* success / future completed */
#define AL_INTERRUPTED      1   /* future getters: interrupted */
#define AL_FIRST_ODD        1   /* ec_increment: "first parameter is odd" */
#define AL_SECOND_ODD       2   /* ec_increment: "second parameter is odd" */
#define AL_OVERFLOW         3   /* ec_increment: sum outside int64_t */
#define AL_NULL_HANDLE      100 /* null handle or null pointer argument */
#define AL_STALE_HANDLE     101 /* freed or never-issued handle */
#define AL_NOT_INITIALIZED  102 /* al_init not called */
#define AL_WRONG_KIND       103 /* live handle of a different object kind */

typedef void* AlHandle;            /* 0 is null */

void     al_init(void);
void     al_exit(void);
AlHandle ec_init_app(void);
int32_t  ec_increment(AlHandle app, int64_t delta, int64_t* out);
int32_t  ec_read(AlHandle app, int64_t* out);
int32_t  ec_increase_async(AlHandle app, int32_t duration_s, AlHandle future_out[2]);
int32_t  al_future_get_int(AlHandle future[2], int64_t* out);
int32_t  al_future_get_unit(AlHandle future[2]);
int32_t  al_future_get_ptr(AlHandle future[2], void** out);
int32_t  al_future_try_put_interrupt(AlHandle interrupt_handle);
int32_t  al_handle_free(AlHandle h);
const char* al_error_message(int32_t code);

/*
 * Interrupts through a full call: resolves both handles, interrupts, waits
 * until the result is published, then frees future[0]. Same return values
 * as al_future_try_put_interrupt. Benchmark baseline.
 */
int32_t  ec_interrupt_full(AlHandle future[2]);

#ifdef __cplusplus
}
#endif

#endif /* AGDALACHE_H */
