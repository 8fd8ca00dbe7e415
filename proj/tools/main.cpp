#include "stormsel/cli.hpp"

int main(int argc, char** argv) { return stormsel::run_cli(argc, argv); }
