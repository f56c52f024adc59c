// One PASS/FAIL line per acceptance criterion. Extra detail goes to stderr.
#include <cstdio>
#include <iostream>

#include "joinrank/reproduce.hpp"

using namespace joinrank;

int main(int argc, char** argv) {
  ExampleContext ctx;
  ctx.models_dir = JOINRANK_MODELS_DIR;
  if (const char* s = std::getenv("JOINRANK_SEED")) ctx.config.seed = std::stoull(s);
  ctx.log = [](const std::string& m) { std::cerr << "  .. " << m << "\n"; };
  const bool verbose = argc > 1 && std::string(argv[1]) == "-v";

  int ac = 0, failed = 0;
  for (const auto& e : registry()) {
    if (e.extended) continue;
    ++ac;
    std::cerr << "AC" << ac << " " << e.id << "\n";
    const ExampleReport r = run_example(e, ctx);
    if (verbose) std::cerr << to_json(r).dump(2) << "\n";
    std::printf("AC%d %-24s %s (%.1fs)\n", ac, e.id.c_str(), r.pass ? "PASS" : "FAIL", r.seconds);
    for (const auto& f : r.failures) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
