#include "gpetas/cli.hpp"

int main(int argc, char** argv) { return gpetas::run_cli(argc, argv); }
