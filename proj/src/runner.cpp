#include "modmap/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>

#include "modmap/consensus.hpp"

namespace modmap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::ssml_gaussian: return "ssml-gaussian";
    case Mode::ssml_sparse: return "ssml-sparse";
    case Mode::specp_group: return "specp-group";
    case Mode::specp_nuclear: return "specp-nuclear";
    case Mode::custom: return "custom";
  }
  return "?";
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "ssml-gaussian") return Mode::ssml_gaussian;
  if (s == "ssml-sparse") return Mode::ssml_sparse;
  if (s == "specp-group") return Mode::specp_group;
  if (s == "specp-nuclear") return Mode::specp_nuclear;
  if (s == "custom") return Mode::custom;
  return std::nullopt;
}

// Accumulates schema diagnostics; getters leave defaults in place on error.
struct Checker {
  std::vector<std::string> problems;

  void fail(const std::string& field, const std::string& msg) {
    problems.push_back(field + ": " + msg);
  }

  void known_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : keys)
        if (it.key() == k) {
          known = true;
          break;
        }
      if (!known) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }

  template <typename T, typename Pred>
  void number(const json& obj, const std::string& where, const char* key, T& out, Pred pred,
              const char* requirement) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string field = where + "." + key;
    if (!v.is_number()) {
      fail(field, "must be a number");
      return;
    }
    const double d = v.get<double>();
    if (!pred(d)) {
      fail(field, requirement);
      return;
    }
    out = static_cast<T>(d);
  }

  void integer(const json& obj, const std::string& where, const char* key, Index& out, Index min,
               const char* requirement) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string field = where + "." + key;
    if (!v.is_number_integer()) {
      fail(field, "must be an integer");
      return;
    }
    const auto i = v.get<std::int64_t>();
    if (i < min) {
      fail(field, requirement);
      return;
    }
    out = static_cast<Index>(i);
  }

  void boolean(const json& obj, const std::string& where, const char* key, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      fail(where + "." + key, "must be a boolean");
      return;
    }
    out = v.get<bool>();
  }
};

bool finite(double d) { return std::isfinite(d); }

RunConfig parse_config(const std::string& path, std::vector<std::string>& problems) {
  RunConfig rc;
  rc.base_dir = fs::absolute(fs::path(path)).parent_path();

  std::ifstream in(path);
  if (!in) {
    problems.push_back("config: cannot open '" + path + "'");
    return rc;
  }
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    problems.push_back(std::string("config: invalid JSON: ") + e.what());
    return rc;
  }
  if (!root.is_object()) {
    problems.push_back("config: top level must be an object");
    return rc;
  }

  Checker c;
  c.known_keys(root, "", {"schema_version", "mode", "out_dir", "admm", "learning", "spectro",
                          "custom"});

  if (!root.contains("schema_version"))
    c.fail("schema_version", "required");
  else if (!root.at("schema_version").is_number_integer() ||
           root.at("schema_version").get<int>() != 1)
    c.fail("schema_version", "must be the integer 1");

  if (!root.contains("mode")) {
    c.fail("mode", "required");
  } else if (!root.at("mode").is_string()) {
    c.fail("mode", "must be a string");
  } else if (auto m = parse_mode(root.at("mode").get<std::string>())) {
    rc.mode = *m;
  } else {
    c.fail("mode", "must be one of ssml-gaussian, ssml-sparse, specp-group, specp-nuclear, custom");
  }

  if (root.contains("out_dir")) {
    if (!root.at("out_dir").is_string() || root.at("out_dir").get<std::string>().empty())
      c.fail("out_dir", "must be a non-empty string");
    else
      rc.out_dir = root.at("out_dir").get<std::string>();
  }

  if (root.contains("admm")) {
    const json& a = root.at("admm");
    if (!a.is_object()) {
      c.fail("admm", "must be an object");
    } else {
      c.known_keys(a, "admm", {"rho", "beta", "eps_rel", "eps_abs", "max_iter", "seed"});
      c.number(a, "admm", "rho", rc.admm.rho, [](double d) { return finite(d) && d > 0; },
               "must be finite and > 0");
      c.number(a, "admm", "beta", rc.admm.beta, [](double d) { return finite(d) && d >= 0; },
               "must be finite and >= 0");
      c.number(a, "admm", "eps_rel", rc.admm.eps_rel, [](double d) { return finite(d) && d > 0; },
               "must be finite and > 0");
      c.number(a, "admm", "eps_abs", rc.admm.eps_abs, [](double d) { return finite(d) && d > 0; },
               "must be finite and > 0");
      Index mi = rc.admm.max_iter;
      c.integer(a, "admm", "max_iter", mi, 1, "must be >= 1");
      rc.admm.max_iter = static_cast<int>(mi);
      if (a.contains("seed")) {
        if (!a.at("seed").is_number_integer() || a.at("seed").get<std::int64_t>() < 0)
          c.fail("admm.seed", "must be a non-negative integer");
        else
          rc.admm.seed = a.at("seed").get<std::uint64_t>();
      }
    }
  }

  if (root.contains("learning")) {
    const json& l = root.at("learning");
    if (!l.is_object()) {
      c.fail("learning", "must be an object");
    } else {
      c.known_keys(l, "learning",
                   {"trials", "kappa", "gamma", "sigma_v", "p", "sigma", "binary", "reaction",
                    "spikes"});
      c.integer(l, "learning", "trials", rc.learning.trials, 1, "must be >= 1");
      c.number(l, "learning", "kappa", rc.learning.kappa, finite, "must be finite");
      c.number(l, "learning", "gamma", rc.learning.gamma, finite, "must be finite");
      c.number(l, "learning", "sigma_v", rc.learning.sigma_v,
               [](double d) { return finite(d) && d >= 0; }, "must be finite and >= 0");
      c.number(l, "learning", "p", rc.learning.p,
               [](double d) { return d >= 0.0 && d <= 1.0; }, "must be in [0, 1]");
      c.number(l, "learning", "sigma", rc.learning.sigma,
               [](double d) { return finite(d) && d >= 0; }, "must be finite and >= 0");
      auto modality = [&](const char* name, bool& enabled, auto&& fields) {
        if (!l.contains(name)) return;
        const json& sec = l.at(name);
        const std::string where = std::string("learning.") + name;
        if (!sec.is_object()) {
          c.fail(where, "must be an object");
          return;
        }
        c.boolean(sec, where, "enabled", enabled);
        fields(sec, where);
      };
      modality("binary", rc.learning.binary, [&](const json& sec, const std::string& where) {
        c.known_keys(sec, where, {"enabled", "nu", "eta"});
        c.number(sec, where, "nu", rc.learning.params.nu, finite, "must be finite");
        c.number(sec, where, "eta", rc.learning.params.eta, finite, "must be finite");
      });
      modality("reaction", rc.learning.reaction, [&](const json& sec, const std::string& where) {
        c.known_keys(sec, where, {"enabled", "psi", "omega", "sigma_r"});
        c.number(sec, where, "psi", rc.learning.params.psi, finite, "must be finite");
        c.number(sec, where, "omega", rc.learning.params.omega,
                 [](double d) { return finite(d) && d <= 0; }, "must be finite and <= 0");
        c.number(sec, where, "sigma_r", rc.learning.params.sigma_r,
                 [](double d) { return finite(d) && d > 0; }, "must be finite and > 0");
      });
      modality("spikes", rc.learning.spikes, [&](const json& sec, const std::string& where) {
        c.known_keys(sec, where, {"enabled", "xi", "a", "c", "dt", "bins"});
        c.number(sec, where, "xi", rc.learning.params.xi, finite, "must be finite");
        c.number(sec, where, "a", rc.learning.params.a, finite, "must be finite");
        c.number(sec, where, "dt", rc.learning.params.dt,
                 [](double d) { return finite(d) && d > 0; }, "must be finite and > 0");
        c.integer(sec, where, "bins", rc.learning.bins, 1, "must be >= 1");
        if (sec.contains("c")) {
          const json& arr = sec.at("c");
          if (!arr.is_array()) {
            c.fail(where + ".c", "must be an array of numbers");
          } else {
            std::vector<double> weights;
            bool ok = true;
            for (const auto& v : arr) {
              if (!v.is_number() || !finite(v.get<double>())) {
                c.fail(where + ".c", "must be an array of finite numbers");
                ok = false;
                break;
              }
              weights.push_back(v.get<double>());
            }
            if (ok) rc.learning.params.c = std::move(weights);
          }
        }
      });
      if (!rc.learning.binary && !rc.learning.reaction && !rc.learning.spikes)
        c.fail("learning", "at least one modality must be enabled");
    }
  }

  if (root.contains("spectro")) {
    const json& s = root.at("spectro");
    if (!s.is_object()) {
      c.fail("spectro", "must be an object");
    } else {
      c.known_keys(s, "spectro", {"k", "p", "n", "fs", "f0", "f1", "f2", "amp", "noise_sd"});
      c.integer(s, "spectro", "k", rc.spectro.k, 2, "must be >= 2");
      if (rc.spectro.k % 2 != 0) c.fail("spectro.k", "must be even");
      c.integer(s, "spectro", "p", rc.spectro.p, 1, "must be >= 1");
      c.integer(s, "spectro", "n", rc.spectro.n, 1, "must be >= 1");
      c.number(s, "spectro", "fs", rc.spectro.fs, [](double d) { return finite(d) && d > 0; },
               "must be finite and > 0");
      c.number(s, "spectro", "f0", rc.spectro.f0, finite, "must be finite");
      c.number(s, "spectro", "f1", rc.spectro.f1, finite, "must be finite");
      c.number(s, "spectro", "f2", rc.spectro.f2, finite, "must be finite");
      c.number(s, "spectro", "amp", rc.spectro.amp, finite, "must be finite");
      c.number(s, "spectro", "noise_sd", rc.spectro.noise_sd,
               [](double d) { return finite(d) && d >= 0; }, "must be finite and >= 0");
    }
  }

  if (root.contains("custom")) {
    const json& u = root.at("custom");
    if (!u.is_object()) {
      c.fail("custom", "must be an object");
    } else {
      c.known_keys(u, "custom", {"y_csv", "prior", "kappa", "gamma", "sigma_v"});
      if (u.contains("y_csv")) {
        if (!u.at("y_csv").is_string() || u.at("y_csv").get<std::string>().empty())
          c.fail("custom.y_csv", "must be a non-empty string");
        else
          rc.custom.y_csv = u.at("y_csv").get<std::string>();
      }
      if (u.contains("prior")) {
        if (!u.at("prior").is_string())
          c.fail("custom.prior", "must be a string");
        else {
          const std::string p = u.at("prior").get<std::string>();
          if (p != "gaussian" && p != "l1" && p != "group" && p != "nuclear")
            c.fail("custom.prior", "must be one of gaussian, l1, group, nuclear");
          else
            rc.custom.prior = p;
        }
      }
      c.number(u, "custom", "kappa", rc.custom.kappa, finite, "must be finite");
      c.number(u, "custom", "gamma", rc.custom.gamma, finite, "must be finite");
      c.number(u, "custom", "sigma_v", rc.custom.sigma_v,
               [](double d) { return finite(d) && d > 0; }, "must be finite and > 0");
    }
  }

  // Mode-specific requirements.
  if (rc.mode == Mode::ssml_gaussian && !(rc.learning.sigma_v > 0.0))
    c.fail("learning.sigma_v", "must be > 0 for ssml-gaussian (Gaussian prior scale)");
  if (rc.mode == Mode::custom) {
    if (rc.custom.y_csv.empty()) {
      c.fail("custom.y_csv", "required for custom mode");
    } else {
      const fs::path resolved = fs::path(rc.custom.y_csv).is_absolute()
                                    ? fs::path(rc.custom.y_csv)
                                    : rc.base_dir / rc.custom.y_csv;
      if (!fs::exists(resolved))
        c.fail("custom.y_csv", "file does not exist: " + resolved.string());
    }
  }

  problems = std::move(c.problems);
  return rc;
}

}  // namespace

std::vector<std::string> config_problems(const std::string& path) {
  std::vector<std::string> problems;
  parse_config(path, problems);
  return problems;
}

RunConfig load_config(const std::string& path) {
  std::vector<std::string> problems;
  RunConfig rc = parse_config(path, problems);
  if (!problems.empty()) {
    std::string joined;
    for (const auto& p : problems) {
      if (!joined.empty()) joined += "; ";
      joined += p;
    }
    throw ConfigError(joined);
  }
  return rc;
}

int threads_from_env() {
  const char* env = std::getenv("MODMAP_THREADS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 0)
    throw ConfigError("MODMAP_THREADS must be a non-negative integer");
  return static_cast<int>(v);
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void write_csv_atomic(const fs::path& path, const Matrix& values) {
  std::string text;
  text.reserve(static_cast<std::size_t>(values.size()) * 24 + 16);
  for (Index n = 0; n < values.cols(); ++n) {
    if (n > 0) text += ',';
    text += "t_" + std::to_string(n + 1);
  }
  text += '\n';
  for (Index k = 0; k < values.rows(); ++k) {
    for (Index n = 0; n < values.cols(); ++n) {
      if (n > 0) text += ',';
      text += fmt_double(values(k, n));
    }
    text += '\n';
  }
  write_text_atomic(path, text);
}

Matrix read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && *end == ' ') ++end;
      if (end == begin || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw ConfigError("non-numeric cell in '" + path.string() + "'");
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size())
      throw ConfigError("ragged rows in '" + path.string() + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("no data rows in '" + path.string() + "'");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index col = 0; col < m.cols(); ++col)
      m(r, col) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
  return m;
}

namespace {

std::unique_ptr<SystemPrior> make_custom_prior(const CustomConfig& cc) {
  if (cc.prior == "gaussian") return std::make_unique<GaussianPrior>(cc.gamma, cc.sigma_v);
  if (cc.prior == "l1") return std::make_unique<L1Prior>();
  if (cc.prior == "group") return std::make_unique<GroupSparsePrior>();
  return std::make_unique<NuclearNormPrior>();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

Execution execute(const RunConfig& rc, int threads) {
  Execution ex;
  if (rc.mode == Mode::ssml_gaussian || rc.mode == Mode::ssml_sparse) {
    LearningSimConfig lcfg = rc.learning;
    lcfg.sparse = rc.mode == Mode::ssml_sparse;
    lcfg.seed = rc.admm.seed;
    const LearningSim sim = simulate_learning(lcfg);
    const LearningMeasurement meas(lcfg.params, sim.obs);
    const TransitionModel t = TransitionModel::scalar(lcfg.kappa);
    const ConsensusSolver consensus(t, lcfg.trials);
    std::unique_ptr<SystemPrior> prior;
    if (rc.mode == Mode::ssml_gaussian)
      prior = std::make_unique<GaussianPrior>(lcfg.gamma, lcfg.sigma_v);
    else
      prior = std::make_unique<L1Prior>();
    Timer timer;
    AdmmResult res = admm_run(meas, *prior, consensus, rc.admm, std::nullopt, threads);
    ex.wall_time_seconds = timer.seconds();
    ex.estimate = std::move(res.estimate);
    ex.report = std::move(res.report);
    ex.rmse_value = rmse(ex.estimate, sim.x_true);
    ex.ground_truth = sim.x_true.values();
    return ex;
  }
  if (rc.mode == Mode::specp_group || rc.mode == Mode::specp_nuclear) {
    SpectroConfig scfg = rc.spectro;
    scfg.seed = rc.admm.seed;
    const Vector y = simulate_spectro_signal(scfg);
    const LinearGaussianMeasurement meas = spectro_measurement(scfg, y);
    const TransitionModel t = TransitionModel::identity(scfg.k);
    const ConsensusSolver consensus(t, scfg.n);
    std::unique_ptr<SystemPrior> prior;
    if (rc.mode == Mode::specp_group)
      prior = std::make_unique<GroupSparsePrior>();
    else
      prior = std::make_unique<NuclearNormPrior>();
    Timer timer;
    AdmmResult res = admm_run(meas, *prior, consensus, rc.admm, std::nullopt, threads);
    ex.wall_time_seconds = timer.seconds();
    ex.estimate = std::move(res.estimate);
    ex.report = std::move(res.report);
    ex.power = band_power(ex.estimate.values());
    return ex;
  }

  const fs::path y_path = fs::path(rc.custom.y_csv).is_absolute()
                              ? fs::path(rc.custom.y_csv)
                              : rc.base_dir / rc.custom.y_csv;
  const Matrix y = read_csv(y_path);
  const Index k = y.rows();
  const LinearGaussianMeasurement meas(Matrix(Matrix::Identity(k, k)), y);
  const TransitionModel t(Matrix(rc.custom.kappa * Matrix::Identity(k, k)));
  const ConsensusSolver consensus(t, y.cols());
  const auto prior = make_custom_prior(rc.custom);
  Timer timer;
  AdmmResult res = admm_run(meas, *prior, consensus, rc.admm, std::nullopt, threads);
  ex.wall_time_seconds = timer.seconds();
  ex.estimate = std::move(res.estimate);
  ex.report = std::move(res.report);
  return ex;
}

namespace {

json trace_json(const AdmmReport& report) {
  json arr = json::array();
  for (const IterationRecord& r : report.trace) {
    arr.push_back(json{{"iter", r.iter},
                       {"r1", r.r1},
                       {"r2", r.r2},
                       {"s1", r.s1},
                       {"s2", r.s2},
                       {"eps1_pri", r.eps1_pri},
                       {"eps2_pri", r.eps2_pri},
                       {"eps1_dual", r.eps1_dual},
                       {"eps2_dual", r.eps2_dual},
                       {"objective", r.objective}});
  }
  return arr;
}

void remove_all(const std::vector<fs::path>& files) {
  for (const fs::path& p : files) {
    std::error_code ec;
    fs::remove(p, ec);
  }
}

}  // namespace

int run_command(const std::string& config_path, const Overrides& o) {
  RunConfig rc;
  int threads = 0;
  try {
    rc = load_config(config_path);
    threads = threads_from_env();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (o.out_dir) rc.out_dir = *o.out_dir;
  if (o.seed) rc.admm.seed = *o.seed;
  if (o.max_iter) {
    if (*o.max_iter < 1) {
      std::cerr << "config error: --max-iter must be >= 1\n";
      return 2;
    }
    rc.admm.max_iter = *o.max_iter;
  }

  const fs::path out(rc.out_dir);
  std::vector<fs::path> written;
  try {
    fs::create_directories(out);
    const Execution ex = execute(rc, threads);

    write_csv_atomic(out / "estimate.csv", ex.estimate.values());
    written.push_back(out / "estimate.csv");
    write_text_atomic(out / "trace.json", trace_json(ex.report).dump(2) + "\n");
    written.push_back(out / "trace.json");
    json metrics{{"rmse", ex.rmse_value ? json(*ex.rmse_value) : json(nullptr)},
                 {"iterations", ex.report.iterations},
                 {"converged", ex.report.converged},
                 {"wall_time_seconds", ex.wall_time_seconds}};
    write_text_atomic(out / "metrics.json", metrics.dump(2) + "\n");
    written.push_back(out / "metrics.json");
    if (ex.power) {
      write_csv_atomic(out / "power.csv", *ex.power);
      written.push_back(out / "power.csv");
    }
    if (ex.ground_truth) {
      write_csv_atomic(out / "ground_truth.csv", *ex.ground_truth);
      written.push_back(out / "ground_truth.csv");
    }
    if (!o.quiet) {
      std::cout << "mode=" << mode_name(rc.mode) << " converged=" << ex.report.converged
                << " iterations=" << ex.report.iterations;
      if (ex.rmse_value) std::cout << " rmse=" << fmt_double(*ex.rmse_value);
      std::cout << " wall_time_seconds=" << fmt_double(ex.wall_time_seconds) << " out="
                << out.string() << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    remove_all(written);
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    remove_all(written);
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const AdmmAbort& e) {
    remove_all(written);
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    remove_all(written);
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    remove_all(written);
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    remove_all(written);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int validate_command(const std::string& config_path, bool quiet) {
  const std::vector<std::string> problems = config_problems(config_path);
  if (problems.empty()) {
    if (!quiet) std::cout << "ok\n";
    return 0;
  }
  for (const std::string& p : problems) std::cerr << p << "\n";
  return 2;
}

int simulate_command(const std::string& config_path, const Overrides& o) {
  RunConfig rc;
  try {
    rc = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  if (o.out_dir) rc.out_dir = *o.out_dir;
  if (o.seed) rc.admm.seed = *o.seed;
  if (rc.mode == Mode::custom) {
    std::cerr << "config error: custom mode reads its data from custom.y_csv; nothing to simulate\n";
    return 2;
  }

  const fs::path out(rc.out_dir);
  std::vector<fs::path> written;
  try {
    fs::create_directories(out);
    if (rc.mode == Mode::ssml_gaussian || rc.mode == Mode::ssml_sparse) {
      LearningSimConfig lcfg = rc.learning;
      lcfg.sparse = rc.mode == Mode::ssml_sparse;
      lcfg.seed = rc.admm.seed;
      const LearningSim sim = simulate_learning(lcfg);
      write_csv_atomic(out / "ground_truth.csv", sim.x_true.values());
      written.push_back(out / "ground_truth.csv");
      json obs{{"schema_version", 1},
               {"trials", static_cast<std::int64_t>(lcfg.trials)},
               {"clipped_bins", static_cast<std::int64_t>(sim.clipped_bins)}};
      if (sim.obs.success) {
        json arr = json::array();
        for (Index i = 0; i < sim.obs.success->size(); ++i) arr.push_back((*sim.obs.success)(i));
        obs["success"] = std::move(arr);
      }
      if (sim.obs.reaction) {
        json arr = json::array();
        for (Index i = 0; i < sim.obs.reaction->size(); ++i) arr.push_back((*sim.obs.reaction)(i));
        obs["reaction"] = std::move(arr);
      }
      if (sim.obs.spikes) {
        json arr = json::array();
        for (Index n = 0; n < sim.obs.spikes->cols(); ++n) {
          json trial = json::array();
          for (Index j = 0; j < sim.obs.spikes->rows(); ++j)
            trial.push_back((*sim.obs.spikes)(j, n));
          arr.push_back(std::move(trial));
        }
        obs["spikes"] = std::move(arr);
      }
      write_text_atomic(out / "observations.json", obs.dump(2) + "\n");
      written.push_back(out / "observations.json");
    } else {
      SpectroConfig scfg = rc.spectro;
      scfg.seed = rc.admm.seed;
      const Vector y = simulate_spectro_signal(scfg);
      write_csv_atomic(out / "signal.csv", Matrix(y));
      written.push_back(out / "signal.csv");
    }
    if (!o.quiet) std::cout << "mode=" << mode_name(rc.mode) << " out=" << out.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    remove_all(written);
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    remove_all(written);
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    remove_all(written);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace modmap::cli
