#ifndef HYPERFE_PIPELINE_HPP
#define HYPERFE_PIPELINE_HPP

#include <string>

#include "hyperfe/config.hpp"
#include "hyperfe/mechanics.hpp"

// Pipeline stages behind the CLI commands. Each returns a process exit code
// and is honest about it: 0 only when the documented postcondition holds.
// Progress and results go to stdout, problems to stderr.

namespace hyperfe {

// LHS sample set + cell solutions -> samples.csv + snapshot artifact.
int cmd_generate(const RunConfig& config);

// Snapshots -> POD basis + trained branch checkpoint + loss history CSV.
int cmd_train(const RunConfig& config);

// Reference cell solve vs surrogate prediction at one macro strain; writes
// both field sets (VTK) and the error table (CSV).
int cmd_eval_rve(const RunConfig& config, const Strain2D& eps_bar);

// Macro Newton solve with the chosen evaluator ("fe2" or "hybrid"); writes
// VTK + displacement CSV + timing log.
int cmd_solve(const RunConfig& config, const std::string& evaluator);

// Hybrid vs reference on the configured case(s); writes the benchmark report
// (CSV + text).
int cmd_benchmark(const RunConfig& config);

}  // namespace hyperfe

#endif
