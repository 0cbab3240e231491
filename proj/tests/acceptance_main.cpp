// Ground-truth acceptance suite: one pass/fail line per criterion.
#include <iostream>

#include "qpt/selftest.hpp"

int main() {
  const auto results = qpt::selftest::run_all(std::cout);
  const bool ok = qpt::selftest::all_passed(results);
  std::cout << (ok ? "ACCEPTANCE: all criteria passed\n"
                   : "ACCEPTANCE: at least one criterion failed\n");
  return ok ? 0 : 1;
}
