#include <stdio.h>
#include <string.h>

#include "shiftcode.h"

static int check(ShcStatus s, const char *what) {
    if (s != SHC_STATUS_OK) {
        const char *msg = shc_last_error();
        fprintf(stderr, "%s: status %d: %s\n", what, (int)s, msg ? msg : "");
        return 1;
    }
    return 0;
}

int main(void) {
    ShcCode *xor_code = NULL, *merge = NULL;
    size_t deg = 0, cd = 0;
    if (check(shc_code_fixture("xor", &xor_code), "xor")) return 1;
    if (check(shc_code_fixture("merge", &merge), "merge")) return 1;
    if (check(shc_code_degree(xor_code, NULL, &deg), "degree")) return 1;
    if (check(shc_code_class_degree(merge, NULL, &cd, NULL), "class degree")) return 1;
    if (shc_code_degree(merge, NULL, &deg) != SHC_STATUS_NOT_FINITE_TO_ONE) return 1;
    char *json = NULL;
    if (check(shc_code_to_json(merge, &json), "json")) return 1;
    if (strstr(json, "table") == NULL) return 1;
    shc_string_free(json);
    printf("xor degree %zu, merge class degree %zu\n", deg, cd);
    shc_code_free(xor_code);
    shc_code_free(merge);
    return 0;
}
