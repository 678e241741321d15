#include "rpreg/cli.hpp"

int main(int argc, char** argv) { return rpreg::cli::run(argc, argv); }
