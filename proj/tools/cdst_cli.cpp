#include <cdst/bench.hpp>

#include <iostream>

int main(int argc, char** argv) { return cdst::bench::run_cli(argc, argv, std::cout, std::cerr); }
