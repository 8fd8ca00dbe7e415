#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stormsel {

/// Shared command-line context. `seed` overrides any seed named in the
/// config; `jobs` caps worker threads (0 = hardware concurrency). Neither
/// affects output bytes.
struct CliContext {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  unsigned jobs = 0;
};

/// Command entry points. Each throws UserError for config/input problems and
/// writes its outputs plus a run manifest under ctx.out_dir.
void cmd_synth(const CliContext& ctx);
void cmd_discover(const CliContext& ctx);
void cmd_experiment(const CliContext& ctx);
void cmd_shap(const CliContext& ctx, const std::string& model_a_path,
              const std::string& model_b_path);
void cmd_screen(const CliContext& ctx);

/// Full argv dispatcher used by the binary and by tests. Exit codes:
/// 0 success, 1 internal error, 2 user/config error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace stormsel
