/* cc -Iinclude examples/smoke.c ../../target/release/libncmart_ffi.a -lpthread -ldl -lm */
#include <stdio.h>
#include "ncmart.h"

int main(void) {
    NcmFiltration *f = NULL;
    NcmMartingale *m = NULL;
    NcmDecomposition *d = NULL;
    NcmDecompositionReport r;
    char msg[256];

    if (ncm_filtration_new(NCM_FILTRATION_KIND_TENSOR, 16, 4, 0, &f) != NCM_STATUS_OK) {
        ncm_last_error_message(msg, sizeof msg);
        fprintf(stderr, "filtration: %s\n", msg);
        return 1;
    }
    if (ncm_martingale_random_positive(f, 1729, 1.0, &m) != NCM_STATUS_OK ||
        ncm_decompose(m, &d) != NCM_STATUS_OK ||
        ncm_decomposition_report(d, &r) != NCM_STATUS_OK) {
        ncm_last_error_message(msg, sizeof msg);
        fprintf(stderr, "decompose: %s\n", msg);
        return 1;
    }
    printf("ncmart %s: reconstruction %.3e, l2 %.6f <= %.6f, weak ratio %.6f\n",
           ncm_version(), r.reconstruction, r.l2_value, 2.0 * r.l2_norm, r.weak_ratio);
    ncm_decomposition_free(d);
    ncm_martingale_free(m);
    ncm_filtration_free(f);
    return r.l2_value <= 2.0 * r.l2_norm + 1e-9 ? 0 : 1;
}
