#pragma once

#include <string>

namespace vnslab::accept {

struct AcceptanceOptions {
  std::string work_dir = "acceptance_work";
  int threads = 1;
  bool keep_outputs = false;
};

/// Runs the full acceptance suite, printing one PASS/FAIL line per
/// criterion. Returns the number of failed criteria.
int run_acceptance(const AcceptanceOptions& opts);

}  // namespace vnslab::accept
