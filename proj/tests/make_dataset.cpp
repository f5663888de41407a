// Generates the synthetic corpus into a directory; used by the CLI
// smoke test and handy for manual experiments.
#include <cstdlib>
#include <iostream>
#include <string>

#include "synthetic.hpp"

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "synth_data";
    int per_class = argc > 2 ? std::atoi(argv[2]) : 10;
    std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 7;
    int rate = argc > 4 ? std::atoi(argv[4]) : 16000;
    std::string manifest = sbtest::generate_dataset(dir, per_class, seed, rate);
    std::cout << manifest << "\n";
    return 0;
}
