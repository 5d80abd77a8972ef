/* Minimal consumer of the subgauss-lab C ABI. */
#include "../include/subgauss_lab.h"
#include <stdio.h>

int main(void) {
    SlabSpec *spec = NULL;
    SlabStatus st = slab_spec_from_json("{\"kind\":\"uniform\"}", &spec);
    if (st != SlabStatus_Ok) {
        fprintf(stderr, "spec: %s\n", slab_last_error());
        return 1;
    }
    double t_inf = 0.0, argmax = 0.0;
    st = slab_t_inf(spec, 1, &t_inf, &argmax);
    if (st != SlabStatus_Ok) {
        fprintf(stderr, "t_inf: %s\n", slab_last_error());
        return 1;
    }
    printf("T_inf(p_1||phi) = %.6f at x = %.6f (version %s)\n", t_inf, argmax,
           slab_version());
    slab_spec_free(spec);
    return 0;
}
