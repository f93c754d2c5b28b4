/* Build: cargo build --release -p vcascade-ffi
 *        cc -I crates/ffi/include crates/ffi/examples/demo.c \
 *           target/release/libvcascade_ffi.a -lpthread -ldl -lm -o demo */
#include <stdio.h>
#include "vcascade.h"

int main(void) {
    VcParams *params = NULL;
    VcCascade *run = NULL;
    double taus[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    size_t n = sizeof taus / sizeof taus[0];

    if (vc_params_new(0.9, 0.0, 0.0, VC_NONLINEARITY_ONE, &params) != VC_STATUS_OK) {
        fprintf(stderr, "params: %s\n", vc_last_error_message());
        return 1;
    }
    VcStatus st = vc_cascade_run(params, 4.0, 0.5106, taus, n, 0.0, &run);
    if (st != VC_STATUS_OK) {
        fprintf(stderr, "run (%d): %s\n", (int)st, vc_last_error_message());
        vc_params_free(params);
        return 1;
    }
    double p = 0.0;
    vc_cascade_probability(run, &p);
    printf("vcascade %s, n_max %zu, P(g) = %.6f\n", vc_version(), (size_t)vc_cascade_n_max(run), p);
    printf("tau2,inversion,entropy\n");
    for (size_t k = 0; k < n; k++) {
        double w = 0.0, s = 0.0;
        vc_cascade_inversion(run, k, &w);
        vc_cascade_entropy(run, k, &s);
        printf("%.2f,%.10f,%.10f\n", taus[k], w, s);
    }
    vc_cascade_free(run);
    vc_params_free(params);
    return 0;
}
