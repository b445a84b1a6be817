#include "thermofield/cli.hpp"

int main(int argc, char** argv) { return thermofield::cli::cli_main(argc, argv); }
