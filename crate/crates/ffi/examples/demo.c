#include <stdio.h>

#include "multiprice.h"

int main(void) {
    MpModel *model = NULL;
    if (mp_model_rn_kinked(-0.5, 2.0, &model) != MP_STATUS_OK) {
        fprintf(stderr, "%s\n", mp_last_error());
        return 1;
    }
    MpGrid grid = {0.01, 10.0, 0.01};
    MpElicitation m, p;
    mp_elicit(model, MP_SCENARIO_M, 0.0, 6.0, grid, MP_METHOD_ROW_SCAN, 1e-9, &m);
    mp_elicit(model, MP_SCENARIO_P_IGNORE, 0.0, 6.0, grid, MP_METHOD_ROW_SCAN, 1e-9, &p);
    printf("m=%.2f p=%.2f\n", m.switch_point, p.switch_point);

    uint64_t threshold = 0;
    int32_t has = 0;
    mp_threshold_score(30, 0.05, &threshold, &has);
    printf("threshold(30)=%llu\n", (unsigned long long)threshold);
    mp_model_free(model);
    return 0;
}
