// Command-line driver: classify / construct / extend / verify / demo.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "singulib/error.hpp"
#include "singulib/log.hpp"
#include "singulib/pipeline.hpp"

namespace {

using namespace singulib;
using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format = "json";
  std::optional<double> rho0, rho_max, tol, r0;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "JSON run configuration");
  app->add_option("--out", f.out_dir, "directory for report.json and profile.csv");
  app->add_option("--format", f.format, "what goes to stdout")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--rho0", f.rho0, "inner end of the constructed segment (rho = 1 - 2 log r)");
  app->add_option("--rho-max", f.rho_max, "outer rho of the construction grid");
  app->add_option("--tol", f.tol, "Picard tolerance in the weighted norm");
  app->add_option("--r0", f.r0, "matching radius (sets rho0)");
  app->add_option("--threads", f.threads, "worker threads (0 = hardware)");
}

RunConfig load_config(const CommonFlags& f, std::optional<RunConfig> base) {
  RunConfig c;
  if (base) {
    c = *base;
  } else {
    if (f.config_path.empty()) throw Error(ErrorKind::Config, "--config is required");
    std::ifstream in(f.config_path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + f.config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    c = run_config_from_json(j);
  }
  if (f.rho0 && f.r0) throw Error(ErrorKind::Config, "--rho0 and --r0 both fix the matching point; give one");
  if (f.rho0) {
    if (!(*f.rho0 > 1.0)) throw Error(ErrorKind::Config, "--rho0 must exceed 1");
    c.construct.rho0 = *f.rho0;
    c.r0.reset();
  }
  if (f.r0) {
    if (!(*f.r0 > 0.0 && *f.r0 < 1.0)) throw Error(ErrorKind::Config, "--r0 must lie in (0, 1)");
    c.r0 = *f.r0;
  }
  if (f.rho_max) c.construct.rho_max = *f.rho_max;
  if (f.tol) {
    if (!(*f.tol > 0.0)) throw Error(ErrorKind::Config, "--tol must be positive");
    c.construct.tol = *f.tol;
  }
  if (f.threads) c.threads = *f.threads;
  return c;
}

int emit(const PipelineResult& res, Stage stage, const CommonFlags& f) {
  const json report = report_json(res, stage);
  const std::vector<double>* residual = res.residual ? &res.residual->per_node : nullptr;
  if (!f.out_dir.empty()) {
    std::filesystem::create_directories(f.out_dir);
    std::ofstream(std::filesystem::path(f.out_dir) / "report.json") << report.dump(2) << '\n';
    if (res.profile) {
      std::ofstream csv(std::filesystem::path(f.out_dir) / "profile.csv", std::ios::binary);
      write_profile_csv(csv, *res.profile, residual);
    }
  }
  if (f.format == "csv") {
    if (!res.profile) {
      if (!res.hypothesis_failed) throw Error(ErrorKind::Config, "--format csv needs a profile (not for classify)");
    } else {
      write_profile_csv(std::cout, *res.profile, residual);
    }
  } else {
    std::cout << report.dump(2) << '\n';
  }
  if (res.hypothesis_failed) {
    std::cerr << "hypothesis violated: "
              << (res.failure.empty() ? "eps1 + eps2 does not decay along the model profile" : res.failure) << '\n';
    return 2;
  }
  return 0;
}

void demo_summary(const PipelineResult& res) {
  std::cerr << "nonlinearity: " << res.classification.description << '\n';
  std::cerr << "model B: " << res.classification.model_B
            << "  verdict: " << to_string(res.classification.hypothesis.verdict) << '\n';
  if (res.dirichlet) std::cerr << "Dirichlet radius R: " << res.dirichlet->R << '\n';
  if (res.verification && res.verification->expansion) {
    const auto& e = *res.verification->expansion;
    std::cerr << "expansion remainder order: fitted " << e.alpha << ", expected " << e.expected
              << (e.pass ? "  (pass)" : "  (fail)") << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular radial solutions of -Laplace u = f(u) in the plane"};
  app.require_subcommand(1);

  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    Stage stage;
  };
  const Sub subs[] = {{"classify", "growth exponents and hypothesis verdict", Stage::Classify},
                      {"construct", "inner singular profile by the correction iteration", Stage::Construct},
                      {"extend", "shoot outward to the Dirichlet radius", Stage::Extend},
                      {"verify", "residual, expansion, distributional and bound checks", Stage::Verify}};
  std::vector<std::pair<CLI::App*, Stage>> pipeline_cmds;
  for (const auto& s : subs) {
    CLI::App* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, flags);
    pipeline_cmds.emplace_back(cmd, s.stage);
  }
  CLI::App* demo = app.add_subcommand("demo", "worked examples example3.1 .. example3.4");
  std::string demo_name;
  std::optional<double> demo_q, demo_r;
  demo->add_option("example", demo_name, "example3.1 | example3.2 | example3.3 | example3.4")->required();
  demo->add_option("--q", demo_q, "exponent q");
  demo->add_option("--r", demo_r, "exponent r");
  add_common(demo, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (demo->parsed()) {
      const RunConfig cfg = load_config(flags, demo_config(demo_name, demo_q, demo_r));
      const PipelineResult res = run_pipeline(cfg, Stage::Verify);
      demo_summary(res);
      return emit(res, Stage::Verify, flags);
    }
    for (const auto& [cmd, stage] : pipeline_cmds) {
      if (!cmd->parsed()) continue;
      const RunConfig cfg = load_config(flags, std::nullopt);
      return emit(run_pipeline(cfg, stage), stage, flags);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::HypothesisViolated ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
