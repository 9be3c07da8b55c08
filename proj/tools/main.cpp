#include "cli.hpp"

int main(int argc, char** argv) { return nexg::cli::run(argc, argv); }
