#ifndef SPARSE_RECOVERY_CLI_HPP
#define SPARSE_RECOVERY_CLI_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sparse_recovery {

/// Runs the command line `args` (program name excluded). Returns 0 on
/// success, 1 on usage errors, 2 on runtime or numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// subcommand -> flag -> default as printed by --help, taken from the
/// owning modules' default parameter structs.
std::map<std::string, std::map<std::string, std::string>> cli_default_manifest();

/// Environment variable consulted when --seed is not given.
inline constexpr const char* kSeedEnvironmentVariable = "SPARSE_RECOVER_SEED";

}  // namespace sparse_recovery

#endif  // SPARSE_RECOVERY_CLI_HPP
