#include "cli.hpp"

int main(int argc, char** argv) { return specsense::cli::run(argc, argv); }
