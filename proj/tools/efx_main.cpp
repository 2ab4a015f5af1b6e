#include "efx/cli_runner.hpp"

int main(int argc, char** argv) { return efx::run_cli(argc, argv); }
