/* Flush-to-zero / denormals-are-zero toggling for the DP sweep. */
#ifndef BDCHAIN_FPMODE_H
#define BDCHAIN_FPMODE_H
#if defined(__SSE2__) || defined(_M_X64)
#include <xmmintrin.h>
static inline unsigned int bd_ftz_enter(void) {
    unsigned int old = _mm_getcsr();
    _mm_setcsr(old | 0x8040u);
    return old;
}
static inline void bd_ftz_leave(unsigned int old) { _mm_setcsr(old); }
#else
static inline unsigned int bd_ftz_enter(void) { return 0u; }
static inline void bd_ftz_leave(unsigned int old) { (void)old; }
#endif
#endif
