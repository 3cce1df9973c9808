#include "resonet/validate.hpp"

#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <string>
#include <vector>

// Runs the nine built-in acceptance checks and prints one PASS/FAIL line per
// criterion plus a detail line for every failing sub-item.
//
// Default mode exits with the number of failing criteria.
//
// --known-state mode instead compares the failing sub-item sets against the
// recorded steady state of this implementation and exits 0 only on an exact
// match, so a regression AND a silent improvement both trip the test suite.

int main(int argc, char** argv) {
  bool known_state = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--known-state") == 0) {
      known_state = true;
    } else {
      std::fprintf(stderr, "usage: %s [--known-state]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<resonet::criterion_result> results = resonet::run_acceptance_suite();

  int failures = 0;
  for (const resonet::criterion_result& c : results) {
    std::printf("[%s] criterion %d: %s (%.2f s)\n", c.pass ? "PASS" : "FAIL", c.index,
                c.title.c_str(), c.runtime_s);
    for (const resonet::check_item& item : c.items)
      if (!item.pass)
        std::printf("    FAIL %s: %s\n", item.name.c_str(), item.detail.c_str());
    if (!c.pass)
      ++failures;
  }

  if (!known_state)
    return failures;

  // documented deviations: the reference-dataset sub-checks whose published
  // comparison values require a delay estimate this pipeline rejects, and the
  // worst-case noisy loaded-q bound for shallow-dip corner draws
  const std::map<int, std::set<std::string>> expected{
      {3, {"phi-band", "truth-rel-q_l", "truth-rel-q_c"}},
      {8, {"noisy-q_l"}},
  };

  bool match = true;
  for (const resonet::criterion_result& c : results) {
    std::set<std::string> failing;
    for (const resonet::check_item& item : c.items)
      if (!item.pass)
        failing.insert(item.name);
    const auto it = expected.find(c.index);
    const std::set<std::string> want =
        it == expected.end() ? std::set<std::string>{} : it->second;
    if (failing == want)
      continue;
    match = false;
    std::printf("known-state mismatch in criterion %d:\n", c.index);
    for (const std::string& n : failing)
      if (!want.count(n))
        std::printf("  unexpected failure: %s\n", n.c_str());
    for (const std::string& n : want)
      if (!failing.count(n))
        std::printf("  unexpectedly passing: %s\n", n.c_str());
  }
  std::printf("known-state: %s\n", match ? "MATCH" : "MISMATCH");
  return match ? 0 : 1;
}
