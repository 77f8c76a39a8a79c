// Command-line front end; talks to the core exclusively through the C API.
#include <rfcw.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::string seed;
  int threads = -1;
};

int run(const std::string& command, const GlobalOpts& g) {
  rfcw_session* s = rfcw_open_file(g.config_path.c_str());
  if (!s) {
    std::cerr << "error: " << rfcw_last_error(nullptr) << "\n";
    return 1;
  }
  if (!g.seed.empty()) {
    rfcw_set(s, "model", "seed", g.seed.c_str());
    rfcw_set(s, "simulate", "seed", g.seed.c_str());
    rfcw_set(s, "bounds", "seed", g.seed.c_str());
  }
  if (!g.out_dir.empty()) rfcw_set(s, "output", "dir", g.out_dir.c_str());
  if (g.threads >= 0)
    rfcw_set(s, "runtime", "threads", std::to_string(g.threads).c_str());

  char* json = nullptr;
  int code = rfcw_run(s, command.c_str(), &json);
  if (json) {
    std::cout << json << "\n";
    if (!g.out_dir.empty() && code == 0) {
      std::ofstream os(g.out_dir + "/" + command + ".json");
      if (os)
        os << json << "\n";
      else
        std::cerr << "warning: could not write " << g.out_dir << "/"
                  << command << ".json\n";
    }
    rfcw_free_string(json);
  }
  if (code != 0) std::cerr << "error: command failed (exit " << code << ")\n";
  rfcw_close(s);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-field Curie-Weiss metastability toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "configuration file")
      ->required();
  app.add_option("--seed", g.seed, "override the master seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker thread cap");

  const char* commands[] = {"landscape", "predict",  "exact",  "bounds",
                            "simulate",  "validate", "report"};
  const char* help[] = {
      "free-energy curve, critical points, barrier",
      "sharp capacity and mean-time formulas",
      "exact lumped-chain capacity and mean hitting time",
      "Berman-Konsowa lower and Dirichlet upper capacity bounds",
      "Monte Carlo hitting times on the lumped chain",
      "compare exact, bounds, formula, and Monte Carlo",
      "landscape + predict + exact + bounds in one document"};
  std::string chosen;
  for (int i = 0; i < 7; ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], help[i]);
    std::string name = commands[i];
    sub->callback([&chosen, name] { chosen = name; });
  }

  CLI11_PARSE(app, argc, argv);
  return run(chosen, g);
}
