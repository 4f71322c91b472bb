#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "modmap/admm.hpp"
#include "modmap/experiments.hpp"

namespace modmap::cli {

enum class Mode { ssml_gaussian, ssml_sparse, specp_group, specp_nuclear, custom };

const char* mode_name(Mode m);

struct CustomConfig {
  std::string y_csv;
  std::string prior = "l1";  // gaussian | l1 | group | nuclear
  double kappa = 1.0;
  double gamma = 0.0;   // gaussian prior only
  double sigma_v = 1.0; // gaussian prior only
};

struct RunConfig {
  Mode mode = Mode::ssml_gaussian;
  AdmmConfig admm;
  LearningSimConfig learning;
  SpectroConfig spectro;
  CustomConfig custom;
  std::string out_dir = "out";
  std::filesystem::path base_dir;  // directory of the config file; resolves relative inputs
};

// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  bool quiet = false;
};

// Every problem found in the config (empty means valid). Missing or
// unreadable files yield a single diagnostic.
std::vector<std::string> config_problems(const std::string& path);

// Parses and validates; throws ConfigError with all problems joined.
RunConfig load_config(const std::string& path);

struct Execution {
  LatentSeries estimate;
  AdmmReport report;
  double wall_time_seconds = 0.0;
  std::optional<double> rmse_value;      // simulator-backed modes only
  std::optional<Matrix> power;           // spectro modes only
  std::optional<Matrix> ground_truth;    // simulator-backed modes only
};

// Builds the mode's problem and runs the solver; threads caps the x-update
// fan-out (0 = auto).
Execution execute(const RunConfig& cfg, int threads);

// Subcommand entry points; return the process exit code
// (0 ok, 2 config error, 3 numeric failure).
int run_command(const std::string& config_path, const Overrides& o);
int validate_command(const std::string& config_path, bool quiet);
int simulate_command(const std::string& config_path, const Overrides& o);

// MODMAP_THREADS (0 or unset = auto); malformed values yield ConfigError.
int threads_from_env();

// CSV round-trip helpers. Values are written with 17 significant digits
// under a t_1..t_N header; writes go to a temp file renamed into place.
void write_csv_atomic(const std::filesystem::path& path, const Matrix& values);
Matrix read_csv(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace modmap::cli
