#pragma once

#include <string>
#include <vector>

#include "qbell/steane.hpp"

namespace qbell {

struct VerifyReport {
  struct Group {
    std::string name;
    std::size_t checked = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;  // first few, for diagnostics

    void fail(const std::string& what) {
      ++failed;
      if (failures.size() < 8) failures.push_back(what);
    }
  };
  std::vector<Group> groups;

  bool ok() const {
    for (const auto& g : groups)
      if (g.failed) return false;
    return true;
  }
  Group& add(const std::string& name) {
    groups.push_back({name, 0, 0, {}});
    return groups.back();
  }
};

struct VerifyOptions {
  // Branch-gauge samples per fault case in the gadget sweeps.
  int seeds = 1;
  // Random instances per pass in the pass-oracle group.
  int pass_instances = 100;
  // Reduced caps for a quick run.
  bool quick = false;
};

// Fig. 3 contract exhaustion at t=1 for one EC circuit (every single wire
// fault and every weight<=1 input error, ideal-decode comparison on Choi
// input). Exposed separately so mutated gadgets can be checked.
VerifyReport::Group verify_ec_contract(const Circuit& ec, const VerifyOptions& opts);

// Full verification: gadget exhaustion for all roles, enc/dec contracts,
// pass/fault-map oracles, routing permutation checks, and the level-1 level
// reduction instance on C^prep.
VerifyReport run_verify(const VerifyOptions& opts);

std::string format_report(const VerifyReport& rep);

}  // namespace qbell
