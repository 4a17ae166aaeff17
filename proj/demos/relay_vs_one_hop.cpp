// Runs the fifteen-node attack with one and with three relay hops and prints
// the follower residual every 25 rounds side by side.

#include <iomanip>
#include <iostream>

#include "rclab/rclab.hpp"

using namespace rclab;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : RCLAB_CORPUS_DIR;
  auto one = load_scenario(dir + "/scenarios/fifteen_node_1hop.json").scenario;
  auto three = load_scenario(dir + "/scenarios/fifteen_node_3hop.json").scenario;
  one.options.rounds = three.options.rounds = 300;
  const Trace a = run(one);
  const Trace b = run(three);
  std::cout << std::setw(6) << "round" << std::setw(16) << "1-hop residual" << std::setw(16) << "3-hop residual"
            << '\n';
  for (long long k = 0; k <= a.rounds(); k += 25)
    std::cout << std::setw(6) << k << std::setw(16) << a.axes[0].residual[static_cast<std::size_t>(k)] << std::setw(16)
              << b.axes[0].residual[static_cast<std::size_t>(k)] << '\n';
  std::cout << "largest message set: 1 hop " << a.max_message_set << ", 3 hops " << b.max_message_set << '\n';
}
