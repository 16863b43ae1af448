// okflow: prove, bench and dump subcommands.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "okflow/bench.hpp"
#include "okflow/config.hpp"
#include "okflow/pipeline.hpp"

#ifndef OKFLOW_CONFIG_DIR
#define OKFLOW_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace okflow;

namespace {

constexpr int kPass = 0, kProofFail = 1, kUsage = 2;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string default_config(const std::string& name) {
  return env_or("OKFLOW_CONFIG_DIR", OKFLOW_CONFIG_DIR) + "/canonical-" + name + ".cfg";
}

struct ProveArgs {
  std::string which = "local";
  std::string config;
  std::string out;
  std::string backend;
  bool gzip = false;
  bool parallel = false;
  int verbosity = -1;
};

int cmd_prove(const ProveArgs& a) {
  std::vector<std::string> names = a.which == "all" ? std::vector<std::string>{"local", "global"}
                                                     : std::vector<std::string>{a.which};
  if (!a.config.empty() && names.size() > 1) {
    std::cerr << "error: --config applies to a single case\n";
    return kUsage;
  }
  std::vector<Config> cfgs;
  for (const auto& n : names) {
    Config c = load_config(a.config.empty() ? default_config(n) : a.config);
    if (c.name != n) {
      std::cerr << "error: config describes case '" << c.name << "', not '" << n << "'\n";
      return kUsage;
    }
    if (!a.backend.empty()) c.backend = a.backend;
    if (a.gzip) c.gzip = true;
    if (a.verbosity >= 0) c.verbosity = a.verbosity;
    validate(c);
    cfgs.push_back(c);
  }
  std::string out = !a.out.empty() ? a.out : env_or("OKFLOW_OUTPUT_DIR", cfgs.front().output_dir);

  auto run = [&](const Config& c) {
    ProveOptions o;
    o.output_dir = out;
    o.progress = &std::cerr;
    return prove(c, o);
  };
  std::vector<ProofReport> reports;
  if (a.parallel && cfgs.size() > 1) {
    std::vector<std::future<ProofReport>> jobs;
    for (const auto& c : cfgs) jobs.push_back(std::async(std::launch::async, run, std::cref(c)));
    for (auto& j : jobs) reports.push_back(j.get());
  } else {
    for (const auto& c : cfgs) reports.push_back(run(c));
  }
  bool all = true;
  for (const auto& r : reports) {
    std::cout << r.name << ": " << (r.pass() ? "pass" : "fail") << " unstable_epsilon="
              << format_double(r.unstable_epsilon) << " stable_epsilon=" << format_double(r.stable_epsilon)
              << " inclusion=" << (r.inclusion ? "true" : "false");
    if (r.inclusion) std::cout << " T=" << format_double(r.inclusion_time);
    if (!r.failed_stage.empty()) std::cout << " failed_stage=" << r.failed_stage;
    std::cout << " report=" << (fs::path(out) / r.name / "report.txt").string() << '\n';
    all = all && r.pass();
  }
  return all ? kPass : kProofFail;
}

struct BenchArgs {
  std::vector<std::size_t> orders{1, 4, 8, 16};
  std::vector<std::size_t> dims{8, 15, 16, 32};
  std::string backend = "both";
  int reps = 3;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<std::string> backends =
      a.backend == "both" ? std::vector<std::string>{"fft", "direct"} : std::vector<std::string>{a.backend};
  std::cout << "backend,order,m,fft_nodes,seconds_per_step\n";
  for (std::size_t p : a.orders)
    for (std::size_t m : a.dims)
      for (const auto& b : backends) {
        BenchRow r = bench_convolution(b, p, m, a.reps);
        std::cout << r.backend << ',' << r.order << ',' << r.m << ',' << r.fft_nodes << ','
                  << format_double(r.seconds) << '\n';
      }
  return kPass;
}

struct DumpArgs {
  std::string what = "block";
  std::string dir;
  std::string which = "local";
  std::string block = "unstable";
};

// Every ScbSet dump of a step log, keyed by the step line preceding it.
std::vector<std::pair<long, ScbSet>> trajectory_dumps(const std::string& text) {
  std::vector<std::pair<long, ScbSet>> out;
  std::istringstream is(text);
  std::string line;
  long step = -1;
  for (auto pos = is.tellg(); std::getline(is, line); pos = is.tellg()) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("scb ", 0) == 0) {
      is.seekg(pos);
      out.emplace_back(step, read_scb(is));
      continue;
    }
    std::istringstream(line) >> step;
  }
  return out;
}

int cmd_dump(const DumpArgs& a) {
  fs::path base = fs::path(a.dir) / a.which;
  if (!fs::is_directory(base)) {
    std::cerr << "error: no run artifacts in " << base.string() << '\n';
    return kUsage;
  }
  if (a.what == "block") {
    fs::path f = base / (a.block + "_box_log.txt");
    std::ifstream in(f);
    if (!in) {
      std::cerr << "error: missing " << f.string() << '\n';
      return kUsage;
    }
    ScbSet s = read_scb(in);
    std::size_t frame_dim = 0;
    for (std::string line; std::getline(in, line);)
      if (line.rfind("frame_dim=", 0) == 0) frame_dim = std::stoul(line.substr(10));
    std::cout << "index,lo,hi,coordinates\n";
    for (std::size_t k = 1; k <= s.M(); ++k) {
      const Interval& x = s.finite[k - 1];
      bool frame = k <= frame_dim;
      std::cout << k << ',' << format_double(x.lo()) << ',' << format_double(x.hi()) << ','
                << (frame ? "eigenbasis" : "standard") << '\n';
    }
    std::cout << "# tail C=" << format_double(s.tail.C) << " s=" << s.tail.s << '\n';
    return kPass;
  }
  fs::path f = base / "num_integration_log.txt";
  std::string path = fs::exists(f) ? f.string() : f.string() + ".gz";
  if (!fs::exists(path)) {
    std::cerr << "error: missing " << f.string() << '\n';
    return kUsage;
  }
  auto dumps = trajectory_dumps(read_text_file(path));
  std::cout << "step,index,lo,hi\n";
  for (const auto& [step, s] : dumps)
    for (std::size_t k = 1; k <= s.M(); ++k)
      std::cout << step << ',' << k << ',' << format_double(s.finite[k - 1].lo()) << ','
                << format_double(s.finite[k - 1].hi()) << '\n';
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validated integration of the 1D Ohta-Kawasaki flow"};
  app.require_subcommand(1);

  ProveArgs pa;
  auto* prove_cmd = app.add_subcommand("prove", "run the three-step proof for a case");
  prove_cmd->add_option("--case", pa.which, "local, global or all")->check(CLI::IsMember({"local", "global", "all"}));
  prove_cmd->add_option("--config", pa.config, "config file (default: canonical config of the case)");
  prove_cmd->add_option("--out", pa.out, "output directory (else $OKFLOW_OUTPUT_DIR, else the config)");
  prove_cmd->add_option("--backend", pa.backend, "convolution backend")->check(CLI::IsMember({"fft", "direct"}));
  prove_cmd->add_flag("--gzip", pa.gzip, "gzip the integration log");
  prove_cmd->add_flag("--parallel-cases", pa.parallel, "run the cases of --case all concurrently");
  prove_cmd->add_option("--verbosity", pa.verbosity, "0 quiet, 1 stages, 2 progress");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "time the cubic convolution per step");
  bench_cmd->add_option("--orders", ba.orders, "Taylor orders")->delimiter(',');
  bench_cmd->add_option("--dims", ba.dims, "Galerkin dimensions m")->delimiter(',');
  bench_cmd->add_option("--backend", ba.backend)->check(CLI::IsMember({"fft", "direct", "both"}));
  bench_cmd->add_option("--reps", ba.reps, "repetitions, best time kept")->check(CLI::PositiveNumber);

  DumpArgs da;
  auto* dump_cmd = app.add_subcommand("dump", "CSV of a block or of the trajectory dumps");
  dump_cmd->add_option("--what", da.what)->check(CLI::IsMember({"block", "trajectory"}));
  dump_cmd->add_option("--dir", da.dir, "output directory of a prove run")->required();
  dump_cmd->add_option("--case", da.which)->check(CLI::IsMember({"local", "global"}));
  dump_cmd->add_option("--block", da.block)->check(CLI::IsMember({"unstable", "stable"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  try {
    if (*prove_cmd) return cmd_prove(pa);
    if (*bench_cmd) return cmd_bench(ba);
    if (*dump_cmd) return cmd_dump(da);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
