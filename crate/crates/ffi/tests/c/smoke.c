#include <math.h>
#include <stdio.h>

#include "qheat.h"

#define CHECK(x)                                                   \
    do {                                                           \
        QhStatus s_ = (x);                                         \
        if (s_ != QH_STATUS_OK) {                                  \
            fprintf(stderr, "%s -> %d: %s\n", #x, (int)s_,         \
                    qh_last_error_message());                      \
            return 1;                                              \
        }                                                          \
    } while (0)

int main(void) {
    QhSystem *sys = NULL;
    CHECK(qh_system_spin1(1.0, 0.5, false, &sys));

    double levels[3];
    CHECK(qh_system_levels(sys, levels, 3));

    double beta = 1.2, c[3], z = 0.0;
    for (int k = 0; k < 3; k++) z += c[k] = exp(-beta * levels[k]);
    for (int k = 0; k < 3; k++) c[k] /= z;

    double taus[5] = {1.0, 1.0, 1.0, 1.0, 1.0};
    double p[9];
    CHECK(qh_exact_joint(sys, c, 3, taus, 5, p));

    QhBetaEff b;
    CHECK(qh_beta_eff_joint(sys, p, 9, &b));
    if (fabs(b.value - beta) > 1e-9) {
        fprintf(stderr, "beta_eff %.12f\n", b.value);
        return 1;
    }

    uint64_t counts[9];
    CHECK(qh_monte_carlo(sys, c, 3, 1.0, 5, 1000, 42, 2, counts));
    uint64_t total = 0;
    for (int k = 0; k < 9; k++) total += counts[k];

    if (qh_system_levels(sys, levels, 2) != QH_STATUS_DIMENSION_MISMATCH) return 1;
    if (qh_last_error_message() == NULL) return 1;

    qh_system_free(sys);
    printf("ok %s %.12f %llu\n", qh_version(), b.value, (unsigned long long)total);
    return 0;
}
