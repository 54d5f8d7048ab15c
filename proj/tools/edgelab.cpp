#include "edgelab/cli.hpp"

int main(int argc, char** argv) { return edgelab::cli::run(argc, argv); }
