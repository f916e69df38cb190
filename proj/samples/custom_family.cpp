// Bounds for a family read from JSON, e.g. samples/three_modes.json.

#include <cstdio>
#include <exception>

#include "modebound/bounds.hpp"

using namespace modebound;

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s family.json [nbar]\n", argv[0]);
    return 1;
  }
  try {
    const ModeFamily f = load_family(argv[1]);
    const double nbar = argc > 2 ? std::stod(argv[2]) : 1.0;
    BoundRequest req;
    req.nbar = nbar;
    for (Scenario s : {Scenario::channel, Scenario::source})
      for (Task t : {Task::probabilistic, Task::unambiguous}) {
        req.scenario = s;
        req.task = t;
        const BoundResult r = evaluate(f, req);
        std::printf("%-8s %-5s %.8f (%s)\n", std::string(to_string(s)).c_str(), std::string(to_string(t)).c_str(),
                    r.bound, std::string(to_string(r.status)).c_str());
      }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
}
