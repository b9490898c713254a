#include "poisonfb/cli.hpp"

int main(int argc, char** argv) { return poisonfb::cli::run_cli(argc, argv); }
