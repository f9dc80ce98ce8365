#include <iostream>

#include "pairtrade/pipeline.hpp"

int main(int argc, char** argv) { return pairtrade::cli::run(argc, argv, std::cout, std::cerr); }
