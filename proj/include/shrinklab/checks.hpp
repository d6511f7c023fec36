#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shrinklab {

/// One end-to-end behavioural check of the library, with a human-readable
/// verdict line. Checks are numbered stably so output is scriptable.
struct CheckOutcome {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckSettings {
    std::uint64_t master_seed = 20260825;
    int threads = 4;
};

/// All check ids, in execution order.
std::vector<int> all_check_ids();

/// The fast subset suited to a pre-merge gate (runs in a few minutes).
std::vector<int> quick_check_ids();

/// Runs one check by id; unknown ids throw std::invalid_argument.
CheckOutcome run_check(int id, const CheckSettings& settings);

/// Formats the standard one-line verdict for an outcome.
std::string format_outcome(const CheckOutcome& outcome);

}  // namespace shrinklab
