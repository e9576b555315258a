#include "lmfractal/cli.hpp"

int main(int argc, char** argv) { return lmfractal::run_cli(argc, argv); }
