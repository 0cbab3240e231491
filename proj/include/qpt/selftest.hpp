#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qpt::selftest {

struct ItemResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the full ground-truth suite, printing one PASS/FAIL line per item as
// it completes. Returns every result; all_passed() on the collection decides
// the process exit code.
std::vector<ItemResult> run_all(std::ostream& out);

bool all_passed(const std::vector<ItemResult>& results);

}  // namespace qpt::selftest
