#include <stdio.h>
#include <math.h>
#include "emr_dlt.h"

int main(void) {
    EmrDistribution *gamma = NULL;
    if (emr_distribution_reference(&gamma) != EMR_STATUS_OK) return 1;
    double eps = 0.0;
    if (emr_de_threshold(gamma, 10, 0.02, &eps) != EMR_STATUS_OK) return 2;
    if (eps < 1.1 || eps > 1.2) return 3;

    double bad[3] = {0.0, 0.5, 0.2};
    EmrDistribution *d = NULL;
    if (emr_distribution_new(EMR_PERSPECTIVE_NODE, bad, 3, &d) != EMR_STATUS_INVALID_DISTRIBUTION) return 4;
    if (emr_last_error_message() == NULL) return 5;

    EmrNetworkParams p = {4, 50, 0.05, 0.1, EMR_RELAY_MODE_BUFFERED, 100000, 3};
    double grid[2] = {0.0, 10.0};
    EmrDistribution *g4 = NULL;
    double w[5] = {0.0, 0.1, 0.5, 0.0, 0.4};
    if (emr_distribution_new(EMR_PERSPECTIVE_NODE, w, 5, &g4) != EMR_STATUS_OK) return 6;
    EmrCampaign *c = NULL;
    if (emr_campaign_run(&p, g4, NULL, 3, grid, 2, &c) != EMR_STATUS_OK) return 7;
    double mean, se;
    if (emr_campaign_point(c, 1, &mean, &se) != EMR_STATUS_OK || mean != 0.0) return 8;
    if (emr_campaign_point(c, 2, &mean, &se) != EMR_STATUS_INVALID_ARGUMENT) return 9;

    printf("threshold %.6f success %.3f\n", eps, emr_campaign_success_fraction(c));
    emr_campaign_free(c);
    emr_distribution_free(g4);
    emr_distribution_free(gamma);
    emr_distribution_free(NULL);
    return 0;
}
