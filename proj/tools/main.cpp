#include "cli.hpp"

int main(int argc, char** argv) { return lsldg::cli::run(argc, argv); }
