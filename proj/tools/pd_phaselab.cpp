#include "pdphase/cli.hpp"

int main(int argc, char** argv) { return pdphase::cli::dispatch(argc, argv); }
