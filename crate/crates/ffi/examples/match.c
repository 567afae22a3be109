/* Segment two trajectory CSV files and print their ICM similarity. */
#include <stdio.h>
#include <stdlib.h>

#include "trajmatch.h"

static int fail(const char *what) {
    const char *msg = tm_last_error_message();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "unknown error");
    return 1;
}

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: %s query.csv model.csv\n", argv[0]);
        return 2;
    }
    TmScene *query = NULL, *model = NULL;
    TmGraph *z = NULL, *y = NULL;
    TmReport *report = NULL;
    if (tm_scene_from_csv(argv[1], &query) != TM_STATUS_OK) return fail("query");
    if (tm_scene_from_csv(argv[2], &model) != TM_STATUS_OK) return fail("model");
    if (tm_scene_segment(query, NULL, &z) != TM_STATUS_OK) return fail("segment query");
    if (tm_scene_segment(model, NULL, &y) != TM_STATUS_OK) return fail("segment model");
    if (tm_match(z, y, TM_METHOD_ICM, NULL, &report) != TM_STATUS_OK) return fail("match");

    double sim = 0.0;
    size_t len = 0;
    tm_report_log_similarity(report, &sim);
    tm_report_mapping_len(report, &len);
    size_t *mapping = malloc(len * sizeof *mapping);
    tm_report_mapping(report, mapping, len);
    printf("trajmatch %s\nlog_similarity %.6f\nmapping", tm_version(), sim);
    for (size_t i = 0; i < len; i++) printf(" %zu", mapping[i]);
    printf("\n");

    free(mapping);
    tm_report_free(report);
    tm_graph_free(z);
    tm_graph_free(y);
    tm_scene_free(query);
    tm_scene_free(model);
    return 0;
}
