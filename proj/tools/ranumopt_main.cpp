#include "ranumopt/cli.hpp"

int main(int argc, char** argv) { return ranumopt::run_cli(argc, argv); }
