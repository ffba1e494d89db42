/* Solves a micro instance exactly and checks the result. */
#include <stdio.h>
#include "aero_orch.h"

static int fail(const char *what, AeroStatus s) {
    const char *msg = aero_last_error();
    fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "");
    return 1;
}

int main(void) {
    AeroInstance *inst = NULL;
    AeroSolution *sol = NULL;
    AeroObjective obj;
    size_t violations = 99;
    AeroStatus s;

    if ((s = aero_instance_generate_micro(2, &inst)) != AERO_STATUS_OK) return fail("generate", s);
    if ((s = aero_oracle_solve(inst, 0.001, &sol)) != AERO_STATUS_OK) return fail("solve", s);
    if ((s = aero_solution_objective(sol, &obj)) != AERO_STATUS_OK) return fail("objective", s);
    if ((s = aero_solution_check(sol, inst, &violations)) != AERO_STATUS_OK) return fail("check", s);
    printf("accepted %zu objective %.6f violations %zu\n", obj.accepted_count, obj.objective_value, violations);

    s = aero_instance_load("/nonexistent/instance.toml", &inst);
    printf("load status %d\n", (int)s);

    aero_solution_free(sol);
    aero_instance_free(inst);
    return violations == 0 && s == AERO_STATUS_IO ? 0 : 1;
}
