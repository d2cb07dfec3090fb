#include "poolrisk/cli.hpp"

int main(int argc, char** argv) { return poolrisk::run_command(argc, argv); }
