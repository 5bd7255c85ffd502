#include "graylith/cli.hpp"

int main(int argc, char** argv) { return graylith::cli::run(argc, argv); }
