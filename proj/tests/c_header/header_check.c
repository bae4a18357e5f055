/* The public header must stay valid C. */
#include "ramanpd/ramanpd.h"

int main(void) {
  rpd_config* cfg = 0;
  if (rpd_config_default(&cfg) != RPD_OK) return 1;
  rpd_config_free(cfg);
  return rpd_version()[0] == '\0';
}
