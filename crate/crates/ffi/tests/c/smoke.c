#include <math.h>
#include <stdio.h>
#include <string.h>

#include "evolve_transport.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,  \
              et_last_error());                                       \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  CHECK(et_scenario_count() > 0);

  EtScenario *disk = NULL;
  CHECK(et_scenario_open("shrinking-disk", &disk) == ET_STATUS_OK);

  double theta = 0.0, v = 0.0;
  CHECK(et_normal_velocity(disk, 0.0, 0, &theta, 1, &v) == ET_STATUS_OK);
  CHECK(fabs(v + 0.1) < 1e-12);

  double n[2];
  double quarter = 1.5707963267948966;
  CHECK(et_exterior_normal(disk, 0.0, 0, &quarter, 1, n, 2) == ET_STATUS_OK);
  CHECK(fabs(n[0]) < 1e-12 && fabs(n[1] - 1.0) < 1e-12);

  EtTransportReport r;
  CHECK(et_verify_transport(disk, "one", 0.0, 1e-4, 16, &r) == ET_STATUS_OK);
  CHECK(r.passed == 1 && r.failed == 0);
  CHECK(fabs(r.rhs + 0.2 * 3.141592653589793) < 1e-10);

  CHECK(et_verify_transport(disk, "nope", 0.0, 1e-4, 16, &r) == ET_STATUS_UNKNOWN_FIELD);
  CHECK(strstr(et_last_error(), "nope") != NULL);

  EtScenario *missing = NULL;
  CHECK(et_scenario_open("no-such-scenario", &missing) == ET_STATUS_UNKNOWN_SCENARIO);
  CHECK(missing == NULL);

  et_scenario_close(disk);
  puts("ok");
  return 0;
}
