#include <stdio.h>
#include "zerovar.h"

int main(void) {
    ZvKernel *k = NULL;
    double sigma = 0.0;
    char msg[128];
    if (zv_kernel_from_json("{\"catalog\":\"sinc\"}", &k) != ZV_STATUS_OK) {
        return 1;
    }
    if (zv_kernel_sigma(k, &sigma) != ZV_STATUS_OK) {
        return 2;
    }
    zv_kernel_free(k);
    printf("version=%s sigma=%.5f\n", zv_version(), sigma);
    ZvStatus s = zv_kernel_from_json("{\"catalog\":\"nonesuch\"}", &k);
    zv_last_error(msg, sizeof msg);
    printf("status=%d error=%s\n", (int)s, msg);
    return k == NULL ? 0 : 3;
}
