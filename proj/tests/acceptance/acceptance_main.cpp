// Runs the acceptance criteria and prints one line per criterion.
// Usage: acceptance [--only id[,id...]] [--fixture model.json]
// Exit status 0 iff every selected criterion passes.

#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>

#include "evotree/acceptance.hpp"

int main(int argc, char** argv) {
  evotree::acceptance::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string id; std::getline(ss, id, ',');) opts.only.push_back(id);
    } else if (std::strcmp(argv[i], "--fixture") == 0 && i + 1 < argc) {
      opts.fixture_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only id[,id...]] [--fixture model.json]\n";
      return 2;
    }
  }
  int failed = 0, total = 0;
  evotree::acceptance::verify(opts, [&](const evotree::acceptance::CriterionResult& r) {
    std::cout << evotree::acceptance::format_line(r) << std::endl;
    std::fprintf(stderr, "  (%.2f s)\n", r.seconds);
    ++total;
    if (!r.pass) ++failed;
  });
  std::cout << (total - failed) << "/" << total << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
