/* Minimal C consumer of the tubeseg FFI: renders a vertical ridge,
 * segments it with the default configuration, and prints the outcome.
 *
 * Build (from the workspace root):
 *   cargo build -p tubeseg-ffi
 *   cc -std=c11 -Wall -Wextra -Icrates/ffi/include examples/segment.c \
 *      -Ltarget/debug -ltubeseg_ffi -lm -o segment_demo
 *   LD_LIBRARY_PATH=target/debug ./segment_demo
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "tubeseg.h"

int main(void) {
    const size_t w = 48, h = 48;
    double *pixels = malloc(w * h * sizeof(double));
    if (pixels == NULL) return 1;
    for (size_t r = 0; r < h; r++) {
        for (size_t c = 0; c < w; c++) {
            double d = (double)c - (double)w / 2.0;
            pixels[r * w + c] = 0.1 + 0.8 * exp(-d * d / 8.0);
        }
    }

    TubesegConfig cfg = tubeseg_config_default();
    TubesegResult *res = NULL;
    TubesegStatus st = tubeseg_segment(pixels, w, h, &cfg, &res);
    if (st != TUBESEG_STATUS_OK) {
        fprintf(stderr, "segment failed: %d (%s)\n", (int)st,
                tubeseg_last_error_message());
        free(pixels);
        return 1;
    }

    printf("tubeseg %s: %zu iterations, reason=%s, %zu vessel pixels\n",
           tubeseg_version(),
           tubeseg_result_iterations(res),
           tubeseg_result_reason(res),
           tubeseg_result_vessel_count(res));

    uint8_t *mask = malloc(w * h);
    if (mask != NULL &&
        tubeseg_result_copy_mask(res, mask, w * h) == TUBESEG_STATUS_OK) {
        for (size_t r = 0; r < h; r += 4) {
            for (size_t c = 0; c < w; c += 2)
                putchar(mask[r * w + c] ? '#' : '.');
            putchar('\n');
        }
    }

    free(mask);
    tubeseg_result_free(res);
    free(pixels);
    return 0;
}
