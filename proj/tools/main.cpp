#include "cli.hpp"

int main(int argc, char** argv) { return distfuse::cli::dispatch(argc, argv); }
