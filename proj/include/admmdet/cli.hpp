#pragma once

#include "admmdet/mimo_model.hpp"
#include "admmdet/psnet.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace admmdet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Everything one command needs, loaded from a JSON file. Accepted keys:
/// mc, kc, q, L, n, rho_init, lr, lr_decay, epochs, batch, samples, fd_step,
/// snr_db_grid, trials, seed. mc, kc, q, L and seed are required.
struct RunConfig {
    SystemConfig system;
    std::size_t hidden = 128;
    TrainConfig train = TrainConfig::psnet_desk();
    Vector snr_grid{0, 2, 4, 6, 8, 10, 12};
    std::size_t trials = 20000;
    std::uint64_t seed = 1;

    /// Training data draws SNR uniformly over the grid's span.
    DatasetDescriptor training_data(std::string_view purpose) const;
};

/// Parses and validates a config; `overrides` maps keys to JSON-encoded values
/// applied on top of the file. Throws ConfigError with file:line context.
RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides = {});

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

} // namespace admmdet::cli
